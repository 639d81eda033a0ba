#pragma once

// Reduction of the linearized embedding equations
//   d_i u . d_j v + d_j u . d_i v = f_ij
// to an n x n first-order system for the tangential components v_i, with the
// normal components recovered algebraically through the matrix H(x).

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "charvar/embed.hpp"
#include "charvar/error.hpp"
#include "charvar/params.hpp"
#include "charvar/polynomial.hpp"

namespace charvar {

struct FrameData {
  int n = 0;
  std::vector<double> x;
  Eigen::MatrixXd tangent;  // ambient x n, column i = d_i u
  Eigen::MatrixXd normal;   // ambient x n(n-1)/2, orthonormal columns N_mu
  Eigen::MatrixXd p;        // induced metric
  std::vector<double> gamma;  // Gamma^k_ij at [(k * n + i) * n + j]
  std::vector<Eigen::VectorXd> second;  // d_ij u at [i * n + j]
  Eigen::MatrixXd hmat;     // rows tau_ij (i<j), columns mu
  std::vector<Eigen::VectorXd> hcoef;  // H^mu_ij as vectors over mu, [i * n + j]
  double tangent_cond = 0.0;
  double h_cond = 0.0;

  double Gamma(int k, int i, int j) const { return gamma[(k * n + i) * n + j]; }
  const Eigen::VectorXd& H(int i, int j) const { return hcoef[i * n + j]; }
};

/// Exact derivatives of the jet at x, Gram-Schmidt normal frame over the
/// ambient directions e_{n+1}, ..., and the Christoffel symbols of p.
inline FrameData frame_at(const EmbeddingJet& jet, const std::vector<double>& x, double max_cond = 1e8) {
  const int n = jet.n, dim = jet.ambient(), codim = dim - n;
  if (static_cast<int>(x.size()) != n) throw Error(ErrorCode::DimensionMismatch, "point dimension");
  const auto u = jet.map();
  FrameData fr;
  fr.n = n;
  fr.x = x;
  fr.tangent.resize(dim, n);
  fr.second.assign(n * n, Eigen::VectorXd(dim));
  std::vector<Eigen::VectorXd> third(n * n * n, Eigen::VectorXd(dim));
  for (int a = 0; a < dim; ++a)
    for (int i = 0; i < n; ++i) {
      const Polynomial di = u[a].derivative(i);
      fr.tangent(a, i) = di(x);
      for (int j = 0; j < n; ++j) {
        const Polynomial dij = di.derivative(j);
        fr.second[i * n + j](a) = dij(x);
      }
    }

  const auto tsv = Eigen::JacobiSVD<Eigen::MatrixXd>(fr.tangent).singularValues();
  fr.tangent_cond = tsv(0) / tsv(n - 1);
  if (!(fr.tangent_cond < max_cond)) throw Error(ErrorCode::IllConditionedFrame, "tangent vectors degenerate");

  // Normal frame.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(fr.tangent);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, n);
  fr.normal.resize(dim, codim);
  for (int m = 0; m < codim; ++m) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, n + m);
    for (int pass = 0; pass < 2; ++pass) {
      v -= q * (q.transpose() * v);
      for (int k = 0; k < m; ++k) v -= fr.normal.col(k).dot(v) * fr.normal.col(k);
    }
    if (!(v.norm() > 1e-8)) throw Error(ErrorCode::IllConditionedFrame, "normal direction degenerate");
    fr.normal.col(m) = v.normalized();
  }

  // Metric, its derivatives and Christoffel symbols.
  fr.p = fr.tangent.transpose() * fr.tangent;
  std::vector<double> dp(n * n * n);  // d_k p_ij at [(k * n + i) * n + j]
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dp[(k * n + i) * n + j] =
            fr.second[k * n + i].dot(fr.tangent.col(j)) + fr.tangent.col(i).dot(fr.second[k * n + j]);
  auto d = [&](int k, int i, int j) { return dp[(k * n + i) * n + j]; };
  const Eigen::MatrixXd pinv = fr.p.inverse();
  fr.gamma.assign(n * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += pinv(k, l) * (d(i, j, l) + d(j, i, l) - d(l, i, j));
        fr.gamma[(k * n + i) * n + j] = 0.5 * s;
      }

  // Second fundamental form in the frame.
  fr.hcoef.assign(n * n, Eigen::VectorXd(codim));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd hv = fr.second[i * n + j];
      for (int k = 0; k < n; ++k) hv -= fr.Gamma(k, i, j) * fr.tangent.col(k);
      fr.hcoef[i * n + j] = fr.normal.transpose() * hv;
    }
  fr.hmat.resize(codim, codim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) fr.hmat.row(pair_slot(i, j, n)) = fr.H(i, j).transpose();
  const auto hsv = Eigen::JacobiSVD<Eigen::MatrixXd>(fr.hmat).singularValues();
  fr.h_cond = hsv(codim - 1) > 0.0 ? hsv(0) / hsv(codim - 1) : INFINITY;
  return fr;
}

struct ReducedSystem {
  int n = 0;
  std::vector<double> x;
  std::vector<Eigen::MatrixXd> A;  // A[k](i, j)
  Eigen::MatrixXd B;
  Eigen::VectorXd F;
  double h_cond = 0.0;
};

namespace detail {

inline Eigen::MatrixXd h_inverse(const FrameData& fr, double max_cond) {
  if (!(fr.h_cond < max_cond))
    throw Error(ErrorCode::HNotInvertible, "H(x) is singular (condition " + std::to_string(fr.h_cond) + ")");
  return fr.hmat.inverse();  // (H^{-1})(mu, tau)
}

/// w_i(tau) = sum_mu H^mu_ii H^{mu tau}.
inline std::vector<Eigen::VectorXd> diagonal_weights(const FrameData& fr, const Eigen::MatrixXd& hinv) {
  std::vector<Eigen::VectorXd> w(fr.n);
  for (int i = 0; i < fr.n; ++i) w[i] = hinv.transpose() * fr.H(i, i);
  return w;
}

}  // namespace detail

/// Coefficients of A^k dV_k + B V = F at the frame point; f holds f_ij at x.
inline ReducedSystem reduced_system(const FrameData& fr, const Eigen::MatrixXd& f, double max_cond = 1e12) {
  const int n = fr.n;
  const Eigen::MatrixXd hinv = detail::h_inverse(fr, max_cond);
  const auto w = detail::diagonal_weights(fr, hinv);
  ReducedSystem rs;
  rs.n = n;
  rs.x = fr.x;
  rs.h_cond = fr.h_cond;
  rs.A.assign(n, Eigen::MatrixXd::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rs.A[k](i, j) = j == k ? (i == k ? 1.0 : 0.0) : -0.5 * w[i](pair_slot(j, k, n));
  rs.B = Eigen::MatrixXd::Zero(n, n);
  rs.F = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double fi = f(i, i);
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) fi -= w[i](pair_slot(k, l, n)) * f(k, l);
    rs.F(i) = 0.5 * fi;
    for (int j = 0; j < n; ++j) {
      double b = -fr.Gamma(j, i, i);
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) b += w[i](pair_slot(k, l, n)) * fr.Gamma(j, k, l);
      rs.B(i, j) = b;
    }
  }
  return rs;
}

/// Left side minus right side of the reduced system for V at x with
/// dv(i, k) = d_k v_i.
inline Eigen::VectorXd tangential_residual(const ReducedSystem& rs, const Eigen::VectorXd& v,
                                           const Eigen::MatrixXd& dv) {
  Eigen::VectorXd r = rs.B * v - rs.F;
  for (int k = 0; k < rs.n; ++k) r += rs.A[k] * dv.col(k);
  return r;
}

/// v^{n+mu} = sum_{i<j} H^{mu tau_ij} (d_j v_i / 2 + d_i v_j / 2 - Gamma^k_ij v_k - f_ij / 2).
inline Eigen::VectorXd normal_components(const FrameData& fr, const Eigen::VectorXd& v, const Eigen::MatrixXd& dv,
                                         const Eigen::MatrixXd& f, double max_cond = 1e12) {
  const int n = fr.n;
  const Eigen::MatrixXd hinv = detail::h_inverse(fr, max_cond);
  Eigen::VectorXd phi(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.5 * dv(i, j) + 0.5 * dv(j, i) - 0.5 * f(i, j);
      for (int k = 0; k < n; ++k) s -= fr.Gamma(k, i, j) * v(k);
      phi(pair_slot(i, j, n)) = s;
    }
  return hinv * phi;
}

struct RoundTrip {
  int points = 0;
  double tangential = 0.0;  // max |A^k dV_k + B V - F|
  double normal = 0.0;      // max |recovered normal part - N^T V|
};

/// Manufactured check: a random quadratic ambient field V gives f_ij and the
/// tangential part v; the reduced system and the normal recovery must both
/// reproduce V at random points |x| <= radius.
inline RoundTrip manufactured_round_trip(const EmbeddingJet& jet, std::uint64_t seed, int points = 20,
                                         double radius = 1e-2) {
  const int n = jet.n, dim = jet.ambient();
  const auto u = jet.map();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Polynomial> field;
  for (int a = 0; a < dim; ++a) {
    Polynomial p = Polynomial::constant(n, unif(rng));
    for (int i = 0; i < n; ++i) {
      Polynomial::Exponent e(n, 0);
      e[i] = 1;
      p.add_term(e, unif(rng));
      for (int j = i; j < n; ++j) {
        auto e2 = e;
        ++e2[j];
        p.add_term(e2, unif(rng));
      }
    }
    field.push_back(std::move(p));
  }
  std::vector<Polynomial> vt(n, Polynomial(n));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < dim; ++a) vt[i] += u[a].derivative(i) * field[a];

  RoundTrip out;
  for (int q = 0; q < points; ++q) {
    std::vector<double> x(n);
    for (auto& v : x) v = radius * unif(rng) / std::sqrt(static_cast<double>(n));
    const FrameData fr = frame_at(jet, x);
    Eigen::MatrixXd f(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int a = 0; a < dim; ++a)
          s += fr.tangent(a, i) * field[a].derivative(j)(x) + fr.tangent(a, j) * field[a].derivative(i)(x);
        f(i, j) = s;
      }
    Eigen::VectorXd v(n), amb(dim);
    Eigen::MatrixXd dv(n, n);
    for (int i = 0; i < n; ++i) {
      v(i) = vt[i](x);
      for (int k = 0; k < n; ++k) dv(i, k) = vt[i].derivative(k)(x);
    }
    for (int a = 0; a < dim; ++a) amb(a) = field[a](x);
    const ReducedSystem rs = reduced_system(fr, f);
    out.tangential = std::max(out.tangential, tangential_residual(rs, v, dv).cwiseAbs().maxCoeff());
    const Eigen::VectorXd nc = normal_components(fr, v, dv, f);
    out.normal = std::max(out.normal, (nc - fr.normal.transpose() * amb).cwiseAbs().maxCoeff());
    ++out.points;
  }
  return out;
}

/// A^k(0) next to the parameters it should reproduce: k,i,j,A,c,diff (1-based).
inline void write_closure_csv(std::ostream& os, const ReducedSystem& rs, const ParamSet& c) {
  os << "k,i,j,A,c,diff\n";
  for (int k = 0; k < rs.n; ++k)
    for (int i = 0; i < rs.n; ++i)
      for (int j = 0; j < rs.n; ++j) {
        const double a = rs.A[k](i, j), e = c(i, k, j);
        os << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << a << ',' << e << ',' << a - e << '\n';
      }
}

}  // namespace charvar
