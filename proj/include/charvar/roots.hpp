#pragma once

// Real roots of small univariate polynomials via companion-matrix
// eigenvalues, with a Newton polish on each accepted real root.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace charvar {

/// Coefficients in ascending order: coeffs[k] multiplies s^k.
using Poly = std::vector<double>;

inline double poly_eval(const Poly& p, double s) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * s + *it;
  return v;
}

inline Poly poly_derivative(const Poly& p) {
  Poly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(static_cast<double>(k) * p[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Poly poly_sub(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return a;
}

struct RealRoots {
  std::vector<double> roots;  // ascending
  int degree = 0;             // effective degree after trimming
  bool near_multiple = false; // two roots (real or complex pair) nearly coincide
};

struct RootOptions {
  double trim = 1e-14;         // leading coefficients below trim * max|coeff| are dropped
  double imag_rel = 1e-8;      // |Im| <= imag_rel * spectral radius counts as real
  double multiple_rel = 1e-6;  // roots closer than this (relative) are flagged
};

inline RealRoots real_roots(Poly p, RootOptions opt = {}) {
  RealRoots out;
  double scale = 0.0;
  for (double v : p) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return out;
  while (!p.empty() && std::abs(p.back()) <= opt.trim * scale) p.pop_back();
  const int deg = static_cast<int>(p.size()) - 1;
  out.degree = deg;
  if (deg < 1) return out;

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) comp(0, k) = -p[deg - 1 - k] / p[deg];
  for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  const Eigen::VectorXcd ev = es.eigenvalues();

  double radius = 0.0;
  for (int k = 0; k < deg; ++k) radius = std::max(radius, std::abs(ev(k)));
  const double ref = std::max(radius, 1e-300);

  for (int a = 0; a < deg; ++a)
    for (int b = a + 1; b < deg; ++b)
      if (std::abs(ev(a) - ev(b)) <= opt.multiple_rel * ref) out.near_multiple = true;

  const Poly dp = poly_derivative(p);
  for (int k = 0; k < deg; ++k) {
    if (std::abs(ev(k).imag()) > opt.imag_rel * ref) continue;
    double s = ev(k).real();
    for (int it = 0; it < 3; ++it) {
      const double d = poly_eval(dp, s);
      if (d == 0.0) break;
      const double step = poly_eval(p, s) / d;
      if (!std::isfinite(step) || std::abs(step) > 1e-6 * std::max(1.0, std::abs(s))) break;
      s -= step;
    }
    out.roots.push_back(s);
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

}  // namespace charvar
