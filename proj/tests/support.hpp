#pragma once

// Independent oracles shared by the unit tests and the acceptance runner.
// Nothing here calls into the routines it is used to check.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Laplace expansion along the first row. Exponential, fine for n <= 7.
inline double cofactor_det(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 1.0;
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd sub(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, oc = 0; c < n; ++c)
        if (c != j) sub(r - 1, oc++) = m(r, c);
    s += ((j % 2) ? -1.0 : 1.0) * m(0, j) * cofactor_det(sub);
  }
  return s;
}

/// P_ij = sum_k c(i, k, j) xi_k straight from an accessor.
template <class C>
Eigen::MatrixXd literal_symbol(const C& c, int n, const Eigen::VectorXd& xi) {
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += c(i, k, j) * xi(k);
      p(i, j) = s;
    }
  return p;
}

/// Central differences of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Eigen::VectorXd a = x, b = x;
    a(k) += h;
    b(k) -= h;
    g(k) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Sign changes of a Sturm sequence at s.
inline int sturm_sign_changes(const std::vector<std::vector<double>>& seq, double s) {
  int changes = 0;
  double prev = 0.0;
  for (const auto& p : seq) {
    double v = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) v = v * s + p[k];
    if (v == 0.0) continue;
    if (prev != 0.0 && (v < 0) != (prev < 0)) ++changes;
    prev = v;
  }
  return changes;
}

/// Number of distinct real roots of p (ascending coefficients) in (lo, hi].
inline int sturm_count(std::vector<double> p, double lo, double hi) {
  auto trim = [](std::vector<double>& q) {
    double m = 0.0;
    for (double v : q) m = std::max(m, std::abs(v));
    while (!q.empty() && std::abs(q.back()) <= 1e-13 * m) q.pop_back();
  };
  trim(p);
  std::vector<std::vector<double>> seq{p};
  std::vector<double> d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(k * p[k]);
  seq.push_back(d);
  while (seq.back().size() > 1) {
    std::vector<double> a = seq[seq.size() - 2], b = seq.back();
    // remainder of a / b
    while (a.size() >= b.size()) {
      const double f = a.back() / b.back();
      const std::size_t off = a.size() - b.size();
      for (std::size_t k = 0; k < b.size(); ++k) a[off + k] -= f * b[k];
      a.pop_back();
    }
    for (double& v : a) v = -v;
    trim(a);
    if (a.empty()) break;
    seq.push_back(a);
  }
  return sturm_sign_changes(seq, lo) - sturm_sign_changes(seq, hi);
}

/// Largest |3x3 minor| of a 4x4 matrix.
inline double max_minor3(const Eigen::Matrix4d& m) {
  double best = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      Eigen::Matrix3d s;
      for (int a = 0, oa = 0; a < 4; ++a) {
        if (a == r) continue;
        for (int b = 0, ob = 0; b < 4; ++b) {
          if (b == c) continue;
          s(oa, ob++) = m(a, b);
        }
        ++oa;
      }
      best = std::max(best, std::abs(s.determinant()));
    }
  return best;
}

/// Real diagonals z with rank(B + diag z) <= 2 found by Gauss-Newton on all
/// sixteen 3x3 minors from random starts. Duplicates are merged.
inline std::vector<Eigen::Vector4d> rank2_diagonals(const Eigen::Matrix4d& b, std::uint64_t seed, int starts = 400) {
  const double s = std::max(1e-300, b.cwiseAbs().maxCoeff());
  auto residual = [&](const Eigen::Vector4d& z) {
    Eigen::Matrix4d m = b;
    m.diagonal() = z;
    Eigen::Matrix<double, 16, 1> r;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c) {
        Eigen::Matrix3d sub;
        for (int p = 0, op = 0; p < 4; ++p) {
          if (p == a) continue;
          for (int q = 0, oq = 0; q < 4; ++q) {
            if (q == c) continue;
            sub(op, oq++) = m(p, q);
          }
          ++op;
        }
        r(a * 4 + c) = sub.determinant();
      }
    return r;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-4.0 * s, 4.0 * s);
  std::vector<Eigen::Vector4d> found;
  for (int k = 0; k < starts; ++k) {
    Eigen::Vector4d z(u(rng), u(rng), u(rng), u(rng));
    for (int it = 0; it < 80; ++it) {
      const auto r = residual(z);
      Eigen::Matrix<double, 16, 4> jac;
      for (int q = 0; q < 4; ++q) {
        const double h = 1e-7 * std::max(s, std::abs(z(q)));
        Eigen::Vector4d a = z, c = z;
        a(q) += h;
        c(q) -= h;
        jac.col(q) = (residual(a) - residual(c)) / (2 * h);
      }
      const Eigen::Vector4d step = jac.colPivHouseholderQr().solve(r);
      if (!step.allFinite()) break;
      z -= step;
      if (step.norm() <= 1e-14 * std::max(s, z.norm())) break;
    }
    if (!z.allFinite() || z.norm() > 1e6 * s) continue;
    if (residual(z).cwiseAbs().maxCoeff() > 1e-10 * s * s * s) continue;
    bool seen = false;
    for (const auto& f : found) seen = seen || (f - z).norm() <= 1e-6 * std::max(s, z.norm());
    if (!seen) found.push_back(z);
  }
  return found;
}

// ---------------------------------------------------------------------------
// Random instances for the two linear-algebra lemmas

/// m+1 vectors in R^m (columns) with v_1..v_{m-1} independent and both v_m
/// and v_{m+1} in their span.
inline Eigen::MatrixXd dependent_family(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd v(m, m + 1);
  for (int k = 0; k < m - 1; ++k)
    for (int r = 0; r < m; ++r) v(r, k) = g(rng);
  for (int extra : {m - 1, m}) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < m - 1; ++k) w += g(rng) * v.col(k);
    v.col(extra) = w;
  }
  return v;
}

/// n x n matrix of rank n-2: a product of Gaussian n x (n-2) and (n-2) x n factors.
inline Eigen::MatrixXd corank2_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n - 2), b(n - 2, n);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (int i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  return a * b;
}

}  // namespace oracle
