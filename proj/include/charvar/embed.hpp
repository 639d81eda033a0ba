#pragma once

// Second-order approximate isometric embeddings.
//
// Given second fundamental form data h_ij in R^{n(n-1)/2}, the map
//   u^l     = x^l + (1/6) alpha^l_{ijk} x^i x^j x^k        (l <= n)
//   u^{n+m} = (1/2) h^m_{ij} x^i x^j
// satisfies du.du - g = O(|x|^3) once the cubic coefficients alpha solve a
// linear system whose consistency is exactly the Gauss equation.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "charvar/error.hpp"
#include "charvar/params.hpp"
#include "charvar/polynomial.hpp"

namespace charvar {

/// Pair enumeration for 1 <= i < j <= n (1-based in and out):
/// tau = (i-1) n - i (i+1) / 2 + j.
inline int tau(int i, int j, int n) {
  if (i >= j) throw Error(ErrorCode::InvalidPair, "tau needs i < j");
  if (i < 1 || j > n) throw Error(ErrorCode::IndexOutOfRange, "tau index out of range");
  return (i - 1) * n - i * (i + 1) / 2 + j;
}

/// 0-based pair slot for i != j (order-insensitive).
inline int pair_slot(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return tau(i + 1, j + 1, n) - 1;
}

struct SecondFundamentalForm {
  int n = 0;
  std::vector<Eigen::VectorXd> h;  // n*n vectors of length n(n-1)/2, symmetric

  int codim() const { return n * (n - 1) / 2; }
  const Eigen::VectorXd& operator()(int i, int j) const { return h[i * n + j]; }
  Eigen::VectorXd& at(int i, int j) { return h[i * n + j]; }

  /// Rows tau_ij (i < j), columns mu: the matrix H(0).
  Eigen::MatrixXd pair_matrix() const {
    const int m = codim();
    Eigen::MatrixXd out(m, m);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.row(pair_slot(i, j, n)) = (*this)(i, j).transpose();
    return out;
  }
};

inline SecondFundamentalForm zero_form(int n) {
  SecondFundamentalForm f;
  f.n = n;
  f.h.assign(n * n, Eigen::VectorXd::Zero(n * (n - 1) / 2));
  return f;
}

/// h_ij = e_{tau_ij} for i < j and h_kk = -2 sum_{i<j} c_k^{ij} e_{tau_ij}.
inline SecondFundamentalForm h_from_params(const ParamSet& c) {
  const int n = c.n();
  auto f = zero_form(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int s = pair_slot(i, j, n);
      f.at(i, j)(s) = 1.0;
      f.at(j, i)(s) = 1.0;
      for (int k = 0; k < n; ++k) f.at(k, k)(s) = -2.0 * c(k, i, j);
    }
  return f;
}

// ---------------------------------------------------------------------------
// Curvature

struct CurvatureTensor {
  int n = 0;
  std::vector<double> r;  // row-major R_ijkl

  explicit CurvatureTensor(int dim = 0) : n(dim), r(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}
  double operator()(int i, int j, int k, int l) const { return r[((i * n + j) * n + k) * n + l]; }
  double& at(int i, int j, int k, int l) { return r[((i * n + j) * n + k) * n + l]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest violation of the antisymmetries, pair symmetry and first Bianchi identity.
  double invariant_residual() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double v = (*this)(i, j, k, l);
            m = std::max({m, std::abs(v + (*this)(j, i, k, l)), std::abs(v + (*this)(i, j, l, k)),
                          std::abs(v - (*this)(k, l, i, j)),
                          std::abs(v + (*this)(i, k, l, j) + (*this)(i, l, j, k))});
          }
    return m;
  }
};

/// Gauss equations: R_ijkl = h_ik . h_jl - h_il . h_jk.
inline CurvatureTensor gauss_curvature(const SecondFundamentalForm& h) {
  const int n = h.n;
  CurvatureTensor R(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) R.at(i, j, k, l) = h(i, k).dot(h(j, l)) - h(i, l).dot(h(j, k));
  return R;
}

/// g_ij(x) = delta_ij + sum_kl q_ijkl x^k x^l, stored by its constant second
/// derivatives d_ijkl = d_k d_l g_ij(0) (symmetric in ij and in kl).
struct QuadraticMetric {
  int n = 0;
  std::vector<double> d;

  explicit QuadraticMetric(int dim = 0) : n(dim), d(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}
  double second(int i, int j, int k, int l) const { return d[((i * n + j) * n + k) * n + l]; }
  double& second_at(int i, int j, int k, int l) { return d[((i * n + j) * n + k) * n + l]; }

  Polynomial component(int i, int j) const {
    Polynomial p = Polynomial::constant(n, i == j ? 1.0 : 0.0);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Polynomial::Exponent e(n, 0);
        ++e[k];
        ++e[l];
        p.add_term(e, 0.5 * second(i, j, k, l));
      }
    return p;
  }
};

/// Normal-coordinate metric g_ij = delta_ij - (1/3) R_ikjl x^k x^l.
inline QuadraticMetric metric_from_curvature(const CurvatureTensor& R, double tol = 1e-10) {
  if (R.invariant_residual() > tol * std::max(1.0, R.max_abs()))
    throw Error(ErrorCode::InvalidCurvature, "curvature tensor violates its symmetries");
  const int n = R.n;
  QuadraticMetric g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) g.second_at(i, j, k, l) = -(R(i, k, j, l) + R(i, l, j, k)) / 3.0;
  return g;
}

/// Curvature at 0 of a normal-coordinate metric:
/// R_ijkl = (d_il g_jk + d_jk g_il - d_ik g_jl - d_jl g_ik) / 2.
inline CurvatureTensor curvature_at_origin(const QuadraticMetric& g) {
  const int n = g.n;
  CurvatureTensor R(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          R.at(i, j, k, l) =
              0.5 * (g.second(j, k, i, l) + g.second(i, l, j, k) - g.second(j, l, i, k) - g.second(i, k, j, l));
  return R;
}

// ---------------------------------------------------------------------------
// Cubic coefficients

struct EmbeddingCounts {
  long long A = 0;  // equations (unordered pair, unordered pair)
  long long B = 0;  // unknowns alpha^l_{ijk}, symmetric in ijk
  long long C = 0;  // equations with i<j, k<l, tau_ij <= tau_kl
  long long classes = 0;  // all-distinct classes
};

inline EmbeddingCounts embedding_counts(int n) {
  EmbeddingCounts k;
  const long long m = 1LL * n * (n + 1) / 2, p = 1LL * n * (n - 1) / 2;
  k.A = m * m;
  k.B = 1LL * n * n * (n + 1) * (n + 2) / 6;
  k.C = p * (p + 1) / 2;
  k.classes = 1LL * n * (n - 1) * (n - 2) * (n - 3) / 24;
  return k;
}

struct EmbeddingJet {
  int n = 0;
  std::vector<double> alpha;  // alpha^l_{ijk} indexed by l and the sorted triple
  SecondFundamentalForm h;
  bool degenerate_h = false;  // pair vectors h_ij (i<j) not a basis

  static int triple_count(int n) { return n * (n + 1) * (n + 2) / 6; }

  /// Slot of the sorted triple i <= j <= k among all such triples.
  static int triple_slot(int n, int i, int j, int k) {
    int a[3] = {i, j, k};
    std::sort(a, a + 3);
    int idx = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q)
        for (int r = q; r < n; ++r) {
          if (p == a[0] && q == a[1] && r == a[2]) return idx;
          ++idx;
        }
    throw Error(ErrorCode::IndexOutOfRange, "triple out of range");
  }
  int unknown(int l, int i, int j, int k) const { return l * triple_count(n) + triple_slot(n, i, j, k); }
  double a(int l, int i, int j, int k) const { return alpha[unknown(l, i, j, k)]; }

  int ambient() const { return n * (n + 1) / 2; }

  /// Components u^1 .. u^{n(n+1)/2} as polynomials.
  std::vector<Polynomial> map() const {
    std::vector<Polynomial> u;
    for (int l = 0; l < n; ++l) {
      Polynomial p = Polynomial::variable(n, l);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            Polynomial::Exponent e(n, 0);
            ++e[i];
            ++e[j];
            ++e[k];
            p.add_term(e, a(l, i, j, k) / 6.0);
          }
      u.push_back(std::move(p));
    }
    for (int m = 0; m < h.codim(); ++m) {
      Polynomial p(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Polynomial::Exponent e(n, 0);
          ++e[i];
          ++e[j];
          p.add_term(e, 0.5 * h(i, j)(m));
        }
      u.push_back(std::move(p));
    }
    return u;
  }
};

/// One equation d_kl g_ij = h_ik.h_lj + h_il.h_jk + alpha^j_{ikl} + alpha^i_{jkl}.
struct Equation4 {
  int i, j, k, l;
};

struct AlphaSolution {
  EmbeddingJet jet;
  EmbeddingCounts counts;
  int selected = 0;
  double gauss_residual = 0.0;
  double max_equation_residual = 0.0;  // over all n^4 equations
  double selected_rcond = 0.0;
};

/// Residual of one equation for a given jet.
inline double equation_residual(const EmbeddingJet& jet, const QuadraticMetric& g, const Equation4& q) {
  const auto& h = jet.h;
  return g.second(q.i, q.j, q.k, q.l) -
         (h(q.i, q.k).dot(h(q.l, q.j)) + h(q.i, q.l).dot(h(q.j, q.k)) + jet.a(q.j, q.i, q.k, q.l) +
          jet.a(q.i, q.j, q.k, q.l));
}

/// Equations solved directly: every unordered pair-pair ({i,j}, {k,l}) with
/// i = j, or k = l, or tau_ij > tau_kl, plus for each 4-set a < b < c < d
/// the representative d_cd g_ab.
inline std::vector<Equation4> selected_equations(int n) {
  std::vector<Equation4> eqs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
          const bool fails = i == j || k == l || pair_slot(i, j, n) > pair_slot(k, l, n);
          if (fails) eqs.push_back({i, j, k, l});
        }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d) eqs.push_back({a, b, c, d});
  return eqs;
}

inline AlphaSolution solve_alpha(const QuadraticMetric& g, const SecondFundamentalForm& h, double gauss_tol = 1e-10,
                                 double consistency_tol = 1e-9) {
  const int n = g.n;
  if (h.n != n) throw Error(ErrorCode::DimensionMismatch, "metric and h dimensions differ");
  AlphaSolution sol;
  sol.counts = embedding_counts(n);

  const CurvatureTensor rg = curvature_at_origin(g), rh = gauss_curvature(h);
  for (std::size_t k = 0; k < rg.r.size(); ++k)
    sol.gauss_residual = std::max(sol.gauss_residual, std::abs(rg.r[k] - rh.r[k]));
  if (sol.gauss_residual > gauss_tol)
    throw Error(ErrorCode::GaussMismatch, "curvature of g and Gauss curvature of h differ by " +
                                              std::to_string(sol.gauss_residual));

  EmbeddingJet& jet = sol.jet;
  jet.n = n;
  jet.h = h;
  jet.alpha.assign(static_cast<std::size_t>(n) * EmbeddingJet::triple_count(n), 0.0);
  {
    const Eigen::MatrixXd hm = h.pair_matrix();
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(hm).singularValues();
    jet.degenerate_h = sv.size() > 0 && !(sv(sv.size() - 1) > 1e-12 * std::max(sv(0), 1.0));
  }

  const auto eqs = selected_equations(n);
  sol.selected = static_cast<int>(eqs.size());
  const int unknowns = static_cast<int>(jet.alpha.size());
  if (sol.selected != unknowns)
    throw Error(ErrorCode::SelectionDegenerate, "selected " + std::to_string(sol.selected) + " equations for " +
                                                    std::to_string(unknowns) + " unknowns");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(unknowns, unknowns);
  Eigen::VectorXd rhs(unknowns);
  for (int r = 0; r < unknowns; ++r) {
    const auto& q = eqs[r];
    m(r, jet.unknown(q.j, q.i, q.k, q.l)) += 1.0;
    m(r, jet.unknown(q.i, q.j, q.k, q.l)) += 1.0;
    rhs(r) = g.second(q.i, q.j, q.k, q.l) - h(q.i, q.k).dot(h(q.l, q.j)) - h(q.i, q.l).dot(h(q.j, q.k));
  }
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  sol.selected_rcond = sv(unknowns - 1) / sv(0);
  if (!(sol.selected_rcond > 1e-12)) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    throw Error(ErrorCode::SelectionDegenerate,
                "selected system has rank " + std::to_string(lu.rank()) + " of " + std::to_string(unknowns));
  }
  const Eigen::VectorXd x = m.partialPivLu().solve(rhs);
  for (int k = 0; k < unknowns; ++k) jet.alpha[k] = x(k);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          sol.max_equation_residual =
              std::max(sol.max_equation_residual, std::abs(equation_residual(jet, g, {i, j, k, l})));
  if (sol.max_equation_residual > consistency_tol)
    throw Error(ErrorCode::ConsistencyFailure, "unselected equations fail by " +
                                                   std::to_string(sol.max_equation_residual));
  return sol;
}

struct Order2Report {
  double max_coefficient = 0.0;  // |coefficient| of degree <= 2 in du.du - g
  double max_derivative = 0.0;   // |partial derivative at 0| of order <= 2
};

/// Exact 2-jet of E = du.du - g at the origin.
inline Order2Report verify_order2(const EmbeddingJet& jet, const QuadraticMetric& g) {
  const int n = jet.n;
  const auto u = jet.map();
  std::vector<std::vector<Polynomial>> du(n);
  for (int i = 0; i < n; ++i)
    for (const auto& comp : u) du[i].push_back(comp.derivative(i));
  Order2Report rep;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Polynomial e = Polynomial(n) - g.component(i, j);
      for (std::size_t a = 0; a < u.size(); ++a) e += du[i][a] * du[j][a];
      rep.max_coefficient = std::max(rep.max_coefficient, e.max_coeff_up_to(2));
      rep.max_derivative = std::max(rep.max_derivative, e.max_derivative_at_zero(2));
    }
  return rep;
}

/// Full pipeline from c: h, Gauss curvature, metric, alpha.
inline AlphaSolution embed_from_params(const ParamSet& c) {
  const auto h = h_from_params(c);
  return solve_alpha(metric_from_curvature(gauss_curvature(h)), h);
}

}  // namespace charvar
