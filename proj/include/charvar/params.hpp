#pragma once

// Parameter collection c = {c_i^{kj}} of the reduced linearized embedding
// system, together with the pointwise genericity checks used by the n = 4
// smoothness result and the n >= 5 singular-locus constructions.
//
// Indices are 0-based throughout the C++ API. Serialized forms use 1-based
// indices so that files read like the usual c_i^{kj} notation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "charvar/error.hpp"

namespace charvar {

/// Number of unordered pairs {k, j}, k != j, in {0..n-1}.
constexpr int pair_count(int n) { return n * (n - 1) / 2; }

/// Position of the pair k < j in lexicographic order (0-based).
constexpr int pair_index(int n, int k, int j) {
  return k * n - (k + 1) * (k + 2) / 2 + j;
}

class ParamSet {
 public:
  ParamSet() = default;

  /// All free entries zero.
  explicit ParamSet(int n) : n_(n) {
    if (n < 3) throw Error(ErrorCode::InvalidDimension, "n must be >= 3, got " + std::to_string(n));
    values_.assign(static_cast<std::size_t>(n) * pair_count(n), 0.0);
  }

  int n() const { return n_; }
  std::size_t free_count() const { return values_.size(); }

  /// c_i^{kj}, resolving symmetry and the implied entries
  /// c_i^{ii} = 1, c_i^{jj} = 0 (i != j).
  double operator()(int i, int k, int j) const {
    if (k == j) return i == k ? 1.0 : 0.0;
    return values_[slot(i, k, j)];
  }

  /// Sets the free entry c_i^{kj} = c_i^{jk}.
  void set(int i, int k, int j, double value) {
    if (k == j) throw Error(ErrorCode::InvalidPair, "c_i^{jj} is implied and cannot be set");
    values_[slot(i, k, j)] = value;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Raw storage, ordered by i and then by the pair (k < j).
  const std::vector<double>& free_values() const { return values_; }
  std::vector<double>& free_values() { return values_; }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::size_t slot(int i, int k, int j) const {
    if (i < 0 || i >= n_ || k < 0 || k >= n_ || j < 0 || j >= n_)
      throw Error(ErrorCode::IndexOutOfRange, "parameter index out of range");
    if (k > j) std::swap(k, j);
    return static_cast<std::size_t>(i) * pair_count(n_) + pair_index(n_, k, j);
  }

  int n_ = 0;
  std::vector<double> values_;
};

struct Distribution {
  enum class Kind { Uniform, PointMass, Normal };
  Kind kind = Kind::Uniform;
  double a = -1.0;  // lower bound, point value, or mean
  double b = 1.0;   // upper bound or standard deviation

  static Distribution uniform(double lo = -1.0, double hi = 1.0) { return {Kind::Uniform, lo, hi}; }
  static Distribution point(double v) { return {Kind::PointMass, v, v}; }
  static Distribution normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }
};

/// Free entries drawn i.i.d. from `dist`, in storage order. Deterministic in
/// (n, seed, dist) for a given standard library.
inline ParamSet sample(int n, std::uint64_t seed, Distribution dist = Distribution::uniform()) {
  ParamSet c(n);
  std::mt19937_64 rng(seed);
  auto& v = c.free_values();
  switch (dist.kind) {
    case Distribution::Kind::Uniform: {
      std::uniform_real_distribution<double> u(dist.a, dist.b);
      for (auto& x : v) x = u(rng);
      break;
    }
    case Distribution::Kind::PointMass:
      std::fill(v.begin(), v.end(), dist.a);
      break;
    case Distribution::Kind::Normal: {
      std::normal_distribution<double> g(dist.a, dist.b);
      for (auto& x : v) x = g(rng);
      break;
    }
  }
  return c;
}

/// t c: every free entry multiplied by t, implied entries untouched.
inline ParamSet scale(const ParamSet& c, double t) {
  ParamSet out = c;
  for (auto& x : out.free_values()) x *= t;
  return out;
}

/// Relabels coordinates: the result d satisfies d_{p(i)}^{p(k)p(j)} = c_i^{kj}.
inline ParamSet permute(const ParamSet& c, const std::vector<int>& perm) {
  const int n = c.n();
  if (static_cast<int>(perm.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "permutation size differs from n");
  ParamSet out(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = k + 1; j < n; ++j) out.set(perm[i], perm[k], perm[j], c(i, k, j));
  return out;
}

// ---------------------------------------------------------------------------
// Genericity checks

struct Violation {
  std::string condition;
  std::vector<int> indices;  // 0-based
  double lhs = 0.0;
  double rhs = 0.0;
};

struct GenericReport {
  int n = 0;
  bool passed = true;
  std::vector<Violation> violations;
  /// Smallest |lhs - rhs| seen, divided by max|c|^degree. Zero for c = 0.
  double min_margin = INFINITY;
};

/// Relative margin for the strict inequalities. A product equality of degree
/// d counts as violated when |lhs - rhs| <= eps * max(|lhs|, |rhs|, s^d) with
/// s = max|c|. Every term is homogeneous of degree d in c, so the outcome does
/// not change under c -> t c.
struct GenericTolerance {
  double eps = 1e-12;
};

namespace detail {

inline void record(GenericReport& report, const ParamSet& c, GenericTolerance tol, int degree,
                   std::string condition, std::vector<int> indices, double lhs, double rhs) {
  const double sd = std::pow(c.max_abs(), degree);
  const double gap = std::abs(lhs - rhs);
  const double thr = tol.eps * std::max({std::abs(lhs), std::abs(rhs), sd});
  report.min_margin = std::min(report.min_margin, sd > 0.0 ? gap / sd : 0.0);
  if (gap <= thr) {
    report.passed = false;
    report.violations.push_back({std::move(condition), std::move(indices), lhs, rhs});
  }
}

}  // namespace detail

/// Triple-product relation for the zero triple (i, j, l) with the single
/// remaining index m (n = 4): c_i^{mj} c_j^{ml} c_l^{mi} vs c_j^{mi} c_l^{mj} c_i^{ml}.
inline std::pair<double, double> triple_products(const ParamSet& c, int i, int j, int l, int m) {
  return {c(i, m, j) * c(j, m, l) * c(l, m, i), c(j, m, i) * c(l, m, j) * c(i, m, l)};
}

/// Pair and triple product inequalities for n = 4.
inline GenericReport check_n4_conditions(const ParamSet& c, GenericTolerance tol = {}) {
  if (c.n() != 4) throw Error(ErrorCode::WrongDimension, "check_n4_conditions needs n = 4");
  GenericReport report;
  report.n = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      int rest[2], r = 0;
      for (int q = 0; q < 4; ++q)
        if (q != i && q != j) rest[r++] = q;
      const int k = rest[0], l = rest[1];
      detail::record(report, c, tol, 2, "n4-pair", {i, j, k, l}, c(j, i, k) * c(i, j, l),
                     c(j, i, l) * c(i, j, k));
    }
  // One inequality per coordinate m, for the triple of the other three.
  for (int m = 0; m < 4; ++m) {
    int t[3], r = 0;
    for (int q = 0; q < 4; ++q)
      if (q != m) t[r++] = q;
    auto [lhs, rhs] = triple_products(c, t[0], t[1], t[2], m);
    detail::record(report, c, tol, 3, "n4-triple", {t[0], t[1], t[2], m}, lhs, rhs);
  }
  return report;
}

/// The bracketed combination in the second n >= 5 condition. For n = 5 it is
/// sum_q c_p^{qI} a_q evaluated at the cross-product solution a of the two
/// linear equations attached to the pair (i, j).
inline double cond2_value(const ParamSet& c, int i, int j, int p, int big_i, int k, int l, int m) {
  return c(p, k, big_i) * (c(i, l, j) * c(j, m, i) - c(j, l, i) * c(i, m, j)) +
         c(p, l, big_i) * (c(j, k, i) * c(i, m, j) - c(i, k, j) * c(j, m, i)) +
         c(p, m, big_i) * (c(i, k, j) * c(j, l, i) - c(j, k, i) * c(i, l, j));
}

/// Pair conditions for (i, j), n >= 5: the 2x2 product inequalities for every
/// k < l outside {i, j}, and for every p outside {i, j} and both I = i and
/// I = j, some k < l < m outside {i, j} with a nonzero cond2_value.
inline GenericReport check_cond12(const ParamSet& c, int i, int j, GenericTolerance tol = {}) {
  const int n = c.n();
  if (n < 5) throw Error(ErrorCode::WrongDimension, "check_cond12 needs n >= 5");
  if (i == j) throw Error(ErrorCode::InvalidPair, "i and j must differ");
  if (i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorCode::IndexOutOfRange, "pair index out of range");
  GenericReport report;
  report.n = n;
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (q != i && q != j) rest.push_back(q);

  for (std::size_t a = 0; a < rest.size(); ++a)
    for (std::size_t b = a + 1; b < rest.size(); ++b) {
      const int k = rest[a], l = rest[b];
      detail::record(report, c, tol, 2, "cond1", {i, j, k, l}, c(i, k, j) * c(j, l, i),
                     c(j, k, i) * c(i, l, j));
    }

  const double s3 = std::pow(c.max_abs(), 3);
  for (int p : rest)
    for (int big_i : {i, j}) {
      double best = 0.0;
      std::vector<int> best_idx{i, j, p, big_i};
      for (std::size_t a = 0; a < rest.size(); ++a)
        for (std::size_t b = a + 1; b < rest.size(); ++b)
          for (std::size_t d = b + 1; d < rest.size(); ++d) {
            const double v = cond2_value(c, i, j, p, big_i, rest[a], rest[b], rest[d]);
            if (std::abs(v) > std::abs(best) || best_idx.size() == 4) {
              best = v;
              best_idx = {i, j, p, big_i, rest[a], rest[b], rest[d]};
            }
          }
      report.min_margin = std::min(report.min_margin, s3 > 0.0 ? std::abs(best) / s3 : 0.0);
      if (std::abs(best) <= tol.eps * s3) {
        report.passed = false;
        report.violations.push_back({"cond2", best_idx, best, 0.0});
      }
    }
  return report;
}

/// check_cond12 over every pair i < j.
inline GenericReport check_all_pairs(const ParamSet& c, GenericTolerance tol = {}) {
  GenericReport all;
  all.n = c.n();
  for (int i = 0; i < c.n(); ++i)
    for (int j = i + 1; j < c.n(); ++j) {
      auto r = check_cond12(c, i, j, tol);
      all.passed = all.passed && r.passed;
      all.min_margin = std::min(all.min_margin, r.min_margin);
      for (auto& v : r.violations) all.violations.push_back(std::move(v));
    }
  return all;
}

}  // namespace charvar
