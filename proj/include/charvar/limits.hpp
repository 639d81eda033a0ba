#pragma once

// Limit set of the singular locus Sigma_sing(t c) as t -> 0.
//
// Every limit direction a has at least two vanishing coordinates. For n = 5
// the limit set is finite and splits by the number of zeros:
//   case 1  two zeros {i, j}: two linear equations, one point per pair;
//   case 2  three zeros {i, j, l}: a cubic in the ratio of the two survivors;
//   case 3  four zeros: the coordinate point e_m, which carries 0 or 2
//           singular points depending on a quadratic.
// For n > 5 each case becomes a family; this header exposes the defining
// equations and a membership test through the rescaled symbol.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "charvar/error.hpp"
#include "charvar/params.hpp"
#include "charvar/roots.hpp"
#include "charvar/symbol.hpp"

namespace charvar {

/// Scales a projective representative so that its largest-magnitude entry is +1.
inline Covector normalize_projective(const Covector& a) {
  Eigen::Index at = 0;
  const double m = a.cwiseAbs().maxCoeff(&at);
  if (m == 0.0) return a;
  return a / a(at);
}

/// Projective equality: unit representatives agree up to sign within `tol`.
inline bool same_projective_point(const Covector& a, const Covector& b, double tol = 1e-6) {
  const Covector ua = a.normalized(), ub = b.normalized();
  return std::min((ua - ub).cwiseAbs().maxCoeff(), (ua + ub).cwiseAbs().maxCoeff()) < tol;
}

struct LimitPoint {
  std::vector<int> zeros;  // sorted, 0-based
  Covector coords;         // largest-|.| coordinate equal to +1
  int case_id = 1;
  int root_count = 1;      // real roots of the pattern's defining polynomial
  bool generic = true;
  std::string note;
  /// Case 3 only: limiting values of the rescaled diagonal (z1..z4, in the
  /// order of `zeros`), one entry per real root of the quadratic.
  std::vector<std::array<double, 4>> zbar;
  /// Case 3 only: positions in `zeros` of the pair whose 2x2 block of P
  /// carries the rank drop.
  std::array<int, 2> free_pair{2, 3};
};

struct Degeneracy {
  ErrorCode code;
  std::vector<int> pattern;
  std::string detail;
};

struct LimitSet {
  std::vector<LimitPoint> points;
  std::vector<Degeneracy> failures;
};

namespace detail {

inline std::vector<int> complement(int n, std::initializer_list<int> drop) {
  std::vector<int> out;
  for (int q = 0; q < n; ++q)
    if (std::find(drop.begin(), drop.end(), q) == drop.end()) out.push_back(q);
  return out;
}

inline std::string pattern_name(const std::vector<int>& z) {
  std::string s = "(";
  for (std::size_t k = 0; k < z.size(); ++k) s += (k ? "," : "") + std::to_string(z[k] + 1);
  return s + ")";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Case 1: two zeros

/// Coefficient rows of the two linear equations attached to the pair (i, j):
/// sum_k c_i^{kj} a_k = 0 and sum_k c_j^{ki} a_k = 0, restricted to the
/// coordinates `rest` (the complement of {i, j}).
inline Matrix pair_equations(const ParamSet& c, int i, int j, const std::vector<int>& rest) {
  Matrix rows(2, static_cast<int>(rest.size()));
  for (std::size_t q = 0; q < rest.size(); ++q) {
    rows(0, static_cast<int>(q)) = c(i, rest[q], j);
    rows(1, static_cast<int>(q)) = c(j, rest[q], i);
  }
  return rows;
}

struct Case1Family {
  int i = 0, j = 0;
  Matrix basis;  // n x (n-4), orthonormal columns spanning the solution space
};

/// Solution space of the pair equations for n >= 5, embedded in R^n.
inline Case1Family case1_family(const ParamSet& c, int i, int j) {
  const int n = c.n();
  if (n < 5) throw Error(ErrorCode::WrongDimension, "case-1 families need n >= 5");
  const auto rest = detail::complement(n, {i, j});
  const Matrix rows = pair_equations(c, i, j, rest);
  Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300) || sv(0) == 0.0)
    throw Error(ErrorCode::DegeneratePair,
                "pair " + detail::pattern_name({i, j}) + " has linearly dependent equations");
  const Matrix null = svd.matrixV().rightCols(n - 4);
  Case1Family fam{i, j, Matrix::Zero(n, n - 4)};
  for (std::size_t q = 0; q < rest.size(); ++q) fam.basis.row(rest[q]) = null.row(static_cast<int>(q));
  return fam;
}

/// One limit point per pair i < j (n = 5).
inline LimitSet case1_points(const ParamSet& c) {
  const int n = c.n();
  if (n != 5) throw Error(ErrorCode::WrongDimension, "case1_points needs n = 5");
  LimitSet out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto rest = detail::complement(n, {i, j});
      const Matrix r = pair_equations(c, i, j, rest);
      const Eigen::Vector3d r1 = r.row(0).transpose(), r2 = r.row(1).transpose();
      const Eigen::Vector3d x = r1.cross(r2);
      const double ref = r1.norm() * r2.norm();
      if (!(x.norm() > 1e-12 * ref)) {
        out.failures.push_back({ErrorCode::DegeneratePair, {i, j}, "equations are linearly dependent"});
        continue;
      }
      if (x.cwiseAbs().minCoeff() <= 1e-12 * x.norm()) {
        out.failures.push_back({ErrorCode::DegeneratePair, {i, j}, "solution has an extra zero coordinate"});
        continue;
      }
      Covector a = Covector::Zero(n);
      for (int q = 0; q < 3; ++q) a(rest[q]) = x(q);
      LimitPoint lp;
      lp.zeros = {i, j};
      lp.coords = normalize_projective(a);
      lp.case_id = 1;
      lp.root_count = 1;
      out.points.push_back(std::move(lp));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Case 2: three zeros

/// b_ij(a) restricted to the coordinates outside the zero pattern.
inline double b_outside(const ParamSet& c, int i, int j, const Covector& a, const std::vector<int>& outside) {
  double s = 0.0;
  for (int k : outside) s += c(i, k, j) * a(k);
  return s;
}

/// Triple-product residual for zeros (i, j, l):
/// b_ij b_jl b_li - b_ji b_lj b_il, sums over k outside {i, j, l}.
inline double triple_residual(const ParamSet& c, int i, int j, int l, const Covector& a) {
  const auto out = detail::complement(c.n(), {i, j, l});
  auto b = [&](int p, int q) { return b_outside(c, p, q, a, out); };
  return b(i, j) * b(j, l) * b(l, i) - b(j, i) * b(l, j) * b(i, l);
}

/// The triple cubic in s = a_{m1} with a_{m2} = 1, where m1 < m2 are the two
/// coordinates outside {i, j, l} (n = 5). Ascending coefficients.
inline Poly triple_cubic(const ParamSet& c, int i, int j, int l) {
  const auto rest = detail::complement(c.n(), {i, j, l});
  const int m1 = rest[0], m2 = rest[1];
  auto lin = [&](int p, int q) { return Poly{c(p, m2, q), c(p, m1, q)}; };
  const Poly lhs = poly_mul(poly_mul(lin(i, j), lin(j, l)), lin(l, i));
  const Poly rhs = poly_mul(poly_mul(lin(j, i), lin(l, j)), lin(i, l));
  return poly_sub(lhs, rhs);
}

inline LimitSet case2_points(const ParamSet& c, RootOptions opt = {}) {
  const int n = c.n();
  if (n != 5) throw Error(ErrorCode::WrongDimension, "case2_points enumerates points only for n = 5");
  LimitSet out;
  const double s3 = std::pow(c.max_abs(), 3);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = j + 1; l < n; ++l) {
        const std::vector<int> zeros{i, j, l};
        const auto rest = detail::complement(n, {i, j, l});
        const Poly cubic = triple_cubic(c, i, j, l);
        if (!(std::abs(cubic[3]) > 1e-14 * s3) && !(std::abs(cubic[0]) > 1e-14 * s3)) {
          out.failures.push_back({ErrorCode::DegenerateTriple, zeros, "cubic has vanishing leading and trailing coefficients"});
          continue;
        }
        opt.trim = std::max(opt.trim, 1e-14);
        const RealRoots rr = real_roots(cubic, opt);
        std::string note;
        bool generic = !rr.near_multiple;
        if (rr.near_multiple) note = "near-multiple root";
        if (rr.degree < 3) {
          generic = false;
          note = "cubic degree drops (root at infinity)";
        }
        std::vector<double> admissible;
        for (double s : rr.roots) {
          if (std::abs(s) <= 1e-12 * std::max(1.0, rr.roots.empty() ? 1.0 : std::abs(rr.roots.back()))) {
            generic = false;
            note = "root at zero excluded (forces a fourth zero)";
            out.failures.push_back({ErrorCode::DegenerateTriple, zeros, note});
            continue;
          }
          admissible.push_back(s);
        }
        if (!generic && note.find("zero") == std::string::npos)
          out.failures.push_back({ErrorCode::DegenerateTriple, zeros, note});
        for (double s : admissible) {
          Covector a = Covector::Zero(n);
          a(rest[0]) = s;
          a(rest[1]) = 1.0;
          LimitPoint lp;
          lp.zeros = zeros;
          lp.coords = normalize_projective(a);
          lp.case_id = 2;
          lp.root_count = static_cast<int>(admissible.size());
          lp.generic = generic;
          lp.note = note;
          out.points.push_back(std::move(lp));
        }
      }
  return out;
}

// ---------------------------------------------------------------------------
// Case 3: four zeros

/// Rescaled 4x4 block at the coordinate point e_m: entry (p, q) is
/// b_{q_p q_q}(e_m) = c_{q_p}^{m q_q} off the diagonal; the diagonal holds
/// the unknowns z and is left at zero here.
inline Eigen::Matrix4d quadruple_block(const ParamSet& c, const std::array<int, 4>& q, int m) {
  Eigen::Matrix4d b = Eigen::Matrix4d::Zero();
  for (int p = 0; p < 4; ++p)
    for (int r = 0; r < 4; ++r)
      if (p != r) b(p, r) = c(q[p], m, q[r]);
  return b;
}

struct QuadrupleSolution {
  Poly quadratic;                         // in z of the first pivot index
  std::vector<std::array<double, 4>> z;   // one per real root
  std::array<int, 2> pivot{0, 1};         // local indices of the 2x2 pivot block
  std::array<int, 2> free{2, 3};          // the other two
  bool generic = true;
  std::string note;
};

/// Solves rank(diag(z) + B) <= 2 for the 4x4 block B.
///
/// With a pivot block {p, q} and the complementary pair {r, s}, the rank drop
/// is equivalent to a vanishing 2x2 Schur complement. Its two off-diagonal
/// entries involve z_p, z_q only and are bilinear; their difference is
/// linear, so substitution leaves a quadratic in z_p. The diagonal entries
/// then give z_r and z_s. Pivot blocks are tried in a fixed order until all
/// divisions are safe.
inline QuadrupleSolution solve_quadruple(const Eigen::Matrix4d& B, double scale) {
  static constexpr std::array<std::array<int, 4>, 6> orders{{
      {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}, {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}}};
  const double s2 = scale * scale, s4 = s2 * s2;
  std::string last = "no admissible pivot block";
  for (const auto& o : orders) {
    const int p = o[0], q = o[1], r = o[2], s = o[3];
    auto b = [&](int x, int y) { return B(x, y); };
    // Off-diagonal Schur entries (r, s) and (s, r), times det of the pivot block:
    //   b_xy z_p z_q - b_xq b_qy z_p - b_xp b_py z_q + k_xy = 0.
    auto coeffs = [&](int x, int y) {
      return std::array<double, 4>{b(x, y), -b(x, q) * b(q, y), -b(x, p) * b(p, y),
                                   b(p, q) * b(x, p) * b(q, y) + b(q, p) * b(x, q) * b(p, y) -
                                       b(x, y) * b(p, q) * b(q, p)};
    };
    const auto e1 = coeffs(r, s), e2 = coeffs(s, r);
    if (std::abs(e1[0]) <= 1e-14 * scale || std::abs(e2[0]) <= 1e-14 * scale) {
      last = "vanishing off-diagonal entry";
      continue;
    }
    // e2[0] * e1 - e1[0] * e2 removes the bilinear term.
    const double l1 = e2[0] * e1[1] - e1[0] * e2[1];
    const double l2 = e2[0] * e1[2] - e1[0] * e2[2];
    const double l0 = e2[0] * e1[3] - e1[0] * e2[3];
    if (std::abs(l2) <= 1e-14 * s4) {
      last = "linear relation does not fix z_q";
      continue;
    }
    // z_q = -(l1 z_p + l0) / l2 inserted into e1, times l2.
    QuadrupleSolution sol;
    sol.pivot = {p, q};
    sol.free = {r, s};
    sol.quadratic = {e1[3] * l2 - e1[2] * l0, -e1[0] * l0 + e1[1] * l2 - e1[2] * l1, -e1[0] * l1};
    const auto& qd = sol.quadratic;
    if (!(std::abs(qd[2]) > 1e-14 * std::abs(e1[0]) * s4)) {
      last = "quadratic degenerates";
      continue;
    }
    const double disc = qd[1] * qd[1] - 4.0 * qd[2] * qd[0];
    const double dscale = std::max(qd[1] * qd[1], std::abs(4.0 * qd[2] * qd[0]));
    if (std::abs(disc) <= 1e-12 * dscale) {
      sol.generic = false;
      sol.note = "double root";
      return sol;
    }
    if (disc < 0.0) return sol;
    const double sq = std::sqrt(disc);
    const double h = -0.5 * (qd[1] + (qd[1] >= 0 ? sq : -sq));
    std::vector<double> roots{h / qd[2], qd[0] / h};
    std::sort(roots.begin(), roots.end());
    bool ok = true;
    for (double zp : roots) {
      const double zq = -(l1 * zp + l0) / l2;
      const double d = zp * zq - b(p, q) * b(q, p);
      if (std::abs(d) <= 1e-10 * s2) {
        ok = false;
        break;
      }
      // Diagonal Schur entries: z_x = E_xx / d.
      auto diag = [&](int x) {
        return (zq * b(x, p) * b(p, x) + zp * b(x, q) * b(q, x) - b(p, q) * b(x, p) * b(q, x) -
                b(q, p) * b(x, q) * b(p, x)) / d;
      };
      std::array<double, 4> z{};
      z[p] = zp;
      z[q] = zq;
      z[r] = diag(r);
      z[s] = diag(s);
      sol.z.push_back(z);
    }
    if (!ok) {
      last = "pivot block singular at a root";
      continue;
    }
    return sol;
  }
  throw Error(ErrorCode::DegenerateQuadruple, last);
}

inline LimitSet case3_points(const ParamSet& c) {
  const int n = c.n();
  if (n != 5) throw Error(ErrorCode::WrongDimension, "case3_points needs n = 5");
  LimitSet out;
  const double s = c.max_abs();
  for (int m = 0; m < n; ++m) {
    std::array<int, 4> q{};
    for (int p = 0, r = 0; p < n; ++p)
      if (p != m) q[r++] = p;
    const std::vector<int> zeros(q.begin(), q.end());
    LimitPoint lp;
    lp.zeros = zeros;
    lp.coords = Covector::Unit(n, m);
    lp.case_id = 3;
    try {
      const auto sol = solve_quadruple(quadruple_block(c, q, m), s);
      lp.root_count = static_cast<int>(sol.z.size());
      lp.zbar = sol.z;
      lp.free_pair = sol.free;
      lp.generic = sol.generic;
      lp.note = sol.note;
      if (!sol.generic) {
        out.failures.push_back({ErrorCode::DegenerateQuadruple, zeros, sol.note});
        continue;
      }
    } catch (const Error& e) {
      out.failures.push_back({e.code(), zeros, e.what()});
      continue;
    }
    out.points.push_back(std::move(lp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counting

struct CountPrediction {
  int alpha = 0, beta = 0, gamma = 0;
  int total = 0;
};

/// Predicted size of Sigma_sing(t c) in P^4 for small t: 10 + alpha + 2 beta + 3 gamma.
inline CountPrediction predict_count(const ParamSet& c) {
  if (c.n() != 5) throw Error(ErrorCode::WrongDimension, "predict_count needs n = 5");
  auto raise = [](const LimitSet& s) {
    if (!s.failures.empty()) {
      const auto& f = s.failures.front();
      throw Error(f.code, detail::pattern_name(f.pattern) + ": " + f.detail);
    }
  };
  const auto c1 = case1_points(c);
  raise(c1);
  const auto c2 = case2_points(c);
  raise(c2);
  const auto c3 = case3_points(c);
  raise(c3);

  CountPrediction pred;
  std::vector<std::vector<int>> seen;
  for (const auto& p : c2.points) {
    if (std::find(seen.begin(), seen.end(), p.zeros) != seen.end()) continue;
    seen.push_back(p.zeros);
    if (p.root_count == 1) ++pred.alpha;
    else if (p.root_count == 3) ++pred.gamma;
    else throw Error(ErrorCode::DegenerateTriple, detail::pattern_name(p.zeros) + ": unexpected root count");
  }
  if (seen.size() != 10)
    throw Error(ErrorCode::DegenerateTriple, "some triples carry no admissible root");
  for (const auto& p : c3.points)
    if (p.root_count == 2) ++pred.beta;
  pred.total = static_cast<int>(c1.points.size()) + pred.alpha + 2 * pred.beta + 3 * pred.gamma;
  return pred;
}

// ---------------------------------------------------------------------------
// General n: rescaled symbol and membership

/// Rescaled symbol at a limit direction a: diagonal a_i, off-diagonal b_ij(a).
inline Matrix rescaled_symbol(const ParamSet& c, const Covector& a) {
  Matrix p = b_matrix(c, a);
  for (int i = 0; i < c.n(); ++i) p(i, i) = a(i);
  return p;
}

struct Membership {
  bool member = false;
  int case_id = 0;
  std::vector<int> zeros;
  double residual = INFINITY;
};

/// Tests a against the three families of the limit set. Residuals are taken
/// on the representative with largest coordinate 1 and scaled by max|c|
/// (or its cube for the triple relation).
inline Membership lambda_membership(const ParamSet& c, const Covector& a, double tol = 1e-10) {
  const int n = c.n();
  if (n < 5) throw Error(ErrorCode::WrongDimension, "limit-set description needs n >= 5");
  const Covector x = normalize_projective(a);
  const Matrix p = rescaled_symbol(c, x);
  const double s = std::max(c.max_abs(), 1e-300);
  Membership best;
  auto consider = [&](int case_id, std::vector<int> zeros, double r) {
    if (r < best.residual) best = {false, case_id, std::move(zeros), r};
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = std::max(std::abs(p(i, i)), std::abs(p(j, j)));
      consider(1, {i, j}, std::max({d, std::abs(p(i, j)) / s, std::abs(p(j, i)) / s}));
      for (int l = j + 1; l < n; ++l) {
        const double d3 = std::max(d, std::abs(p(l, l)));
        const double tri = p(i, j) * p(j, l) * p(l, i) - p(j, i) * p(l, j) * p(i, l);
        consider(2, {i, j, l}, std::max(d3, std::abs(tri) / (s * s * s)));
        for (int k = l + 1; k < n; ++k)
          consider(3, {i, j, l, k}, std::max(d3, std::abs(p(k, k))));
      }
    }
  best.member = best.residual <= tol;
  return best;
}

struct LimitDescription {
  int n = 0;
  std::vector<Case1Family> pair_families;        // two zeros + two linear equations
  std::vector<std::vector<int>> triple_patterns; // three zeros + triple relation
  std::vector<std::vector<int>> quadruple_patterns;
  std::vector<Degeneracy> failures;
};

inline LimitDescription lambda_general(const ParamSet& c) {
  const int n = c.n();
  if (n < 5) throw Error(ErrorCode::WrongDimension, "limit-set description needs n >= 5");
  LimitDescription d;
  d.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      try {
        d.pair_families.push_back(case1_family(c, i, j));
      } catch (const Error& e) {
        d.failures.push_back({e.code(), {i, j}, e.what()});
      }
      for (int l = j + 1; l < n; ++l) {
        d.triple_patterns.push_back({i, j, l});
        for (int k = l + 1; k < n; ++k) d.quadruple_patterns.push_back({i, j, l, k});
      }
    }
  return d;
}

}  // namespace charvar
