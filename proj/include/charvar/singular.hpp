#pragma once

// Points of Sigma_sing(t c): rank P(xi, t c) <= n - 2.
//
// Each limit point of the limit set seeds a local chart in which four minor
// equations have an invertible Jacobian at t = 0. Newton on that chart gives a
// candidate; the candidate is then certified independently (SVD rank and the
// full table of (n-1)x(n-1) minors).
//
// Rows of P indexed by the zero pattern Z are O(t); the charts work with
// P-hat, the symbol with those rows divided by t, and divide each minor by the
// remaining power of t so that the residuals stay O(1) as t -> 0.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "charvar/error.hpp"
#include "charvar/limits.hpp"
#include "charvar/minors.hpp"
#include "charvar/parallel.hpp"
#include "charvar/params.hpp"
#include "charvar/symbol.hpp"

namespace charvar {

using Vec4 = Eigen::Vector4d;

/// Unit vector with its largest-|.| coordinate positive.
inline Covector unit_representative(const Covector& xi) {
  Covector u = xi.normalized();
  Eigen::Index at = 0;
  u.cwiseAbs().maxCoeff(&at);
  return u(at) < 0 ? Covector(-u) : u;
}

inline double projective_distance(const Covector& a, const Covector& b) {
  const Covector ua = a.normalized(), ub = b.normalized();
  return std::min((ua - ub).norm(), (ua + ub).norm());
}

// ---------------------------------------------------------------------------
// Charts

struct Chart {
  int case_id = 1;
  std::vector<int> zeros;
  double t = 0.0;
  std::array<MinorIndex, 4> minors{};  // (row, col) of the targeted minors
  std::array<int, 4> extra{};          // powers of t divided out of each minor
  Vec4 z0 = Vec4::Zero();
  /// Chart coordinates -> (xi, y) with xi_q = t y_q on the zero rows.
  std::function<std::pair<Covector, Covector>(const Vec4&)> map;
};

/// Symbol of t c with the zero-pattern rows divided by t.
inline Matrix scaled_symbol(const ParamSet& c, double t, const std::vector<int>& zeros, const Covector& xi,
                            const Covector& y) {
  const Matrix b = b_matrix(c, xi);
  Matrix p = t * b;
  for (int r = 0; r < c.n(); ++r) p(r, r) += xi(r);
  for (int q : zeros) {
    p.row(q) = b.row(q);
    p(q, q) += y(q);
  }
  return p;
}

inline Vec4 chart_residual(const ParamSet& c, const Chart& ch, const Vec4& z) {
  const auto [xi, y] = ch.map(z);
  const Matrix p = scaled_symbol(c, ch.t, ch.zeros, xi, y);
  Vec4 g;
  for (int k = 0; k < 4; ++k)
    g(k) = minor_det(p, ch.minors[k].first, ch.minors[k].second) / std::pow(ch.t, ch.extra[k]);
  return g;
}

/// Case 1 (zeros i, j) for any n >= 5. The seed a must solve the pair
/// equations. Coordinates outside {i, j, k, l} are frozen at a; (k, l) is the
/// pair with the best-conditioned 2x2 system.
inline Chart case1_chart(const ParamSet& c, double t, int i, int j, const Covector& a) {
  const int n = c.n();
  const auto rest = detail::complement(n, {i, j});
  int bk = -1, bl = -1;
  double best = -1.0;
  for (std::size_t p = 0; p < rest.size(); ++p)
    for (std::size_t q = p + 1; q < rest.size(); ++q) {
      const int k = rest[p], l = rest[q];
      const double d = std::abs(c(i, k, j) * c(j, l, i) - c(i, l, j) * c(j, k, i));
      if (d > best) best = d, bk = k, bl = l;
    }
  const int k = bk, l = bl;
  Eigen::Matrix2d m;
  m << c(i, k, j), c(i, l, j), c(j, k, i), c(j, l, i);
  if (!(best > 1e-12 * std::max(1e-300, std::pow(c.max_abs(), 2))))
    throw Error(ErrorCode::DegeneratePair, "pair equations are singular on every coordinate pair");
  const Eigen::Matrix2d minv = m.inverse();

  Chart ch;
  ch.case_id = 1;
  ch.zeros = {i, j};
  ch.t = t;
  ch.minors = {MinorIndex{i, i}, {j, j}, {i, j}, {j, i}};
  ch.extra = {1, 1, 1, 1};
  ch.map = [&c, t, i, j, k, l, rest, minv, a](const Vec4& z) {
    const int n = c.n();
    Covector xi = Covector::Zero(n), y = Covector::Zero(n);
    Eigen::Vector2d rhs(t * z(2), t * z(3));
    for (int r : rest) {
      if (r == k || r == l) continue;
      xi(r) = a(r);
      rhs(0) -= c(i, r, j) * a(r);
      rhs(1) -= c(j, r, i) * a(r);
    }
    const Eigen::Vector2d kl = minv * rhs;
    xi(k) = kl(0);
    xi(l) = kl(1);
    double si = 0.0, sj = 0.0;
    for (int r : rest) {
      si += c(i, r, i) * xi(r);
      sj += c(j, r, j) * xi(r);
    }
    y(i) = t * z(0) - si;
    y(j) = t * z(1) - sj;
    xi(i) = t * y(i);
    xi(j) = t * y(j);
    return std::pair{xi, y};
  };
  return ch;
}

/// Nonzero tests guarding the Case-2 chart and closure argument.
struct Case2Checks {
  std::vector<std::string> failed;
};

/// Case 2 (zeros i < j < l, n = 5). Unknowns (z1, z2, z3, y4): the rescaled
/// diagonal entries x_i = z1, x_j = z2, x_l = x_l(0) + t z3, and the
/// survivor xi_{m1} = s + t y4 with xi_{m2} = 1.
inline Chart case2_chart(const ParamSet& c, double t, const LimitPoint& seed, Case2Checks* checks = nullptr) {
  const int n = c.n();
  if (n != 5) throw Error(ErrorCode::WrongDimension, "case-2 chart needs n = 5");
  const int i = seed.zeros[0], j = seed.zeros[1], l = seed.zeros[2];
  const auto rest = detail::complement(n, {i, j, l});
  const int m1 = rest[0], m2 = rest[1];
  const double s = seed.coords(m1) / seed.coords(m2);
  auto b0 = [&](int p, int q) { return c(p, m1, q) * s + c(p, m2, q); };

  const double scale = std::max(c.max_abs(), 1e-300);
  const double thr = 1e-10 * scale, thr2 = 1e-10 * scale * scale;
  std::vector<std::string> failed;
  if (std::abs(b0(j, i)) <= thr) failed.push_back("b21");
  if (std::abs(b0(l, i)) <= thr) failed.push_back("b31");
  if (std::abs(b0(l, j)) <= thr) failed.push_back("b32");
  if (std::abs(b0(l, i) * b0(m1, j) - b0(m1, i) * b0(l, j)) <= thr2) failed.push_back("b31*b42-b41*b32");
  if (std::abs(b0(l, i) * b0(m2, j) - b0(m2, i) * b0(l, j)) <= thr2) failed.push_back("b31*b52-b51*b32");
  if (checks) checks->failed = failed;
  if (!failed.empty()) throw Error(ErrorCode::DegenerateTriple, "runtime check failed: " + failed.front());

  const double xl0 = b0(j, l) * b0(l, i) / b0(j, i);
  Chart ch;
  ch.case_id = 2;
  ch.zeros = {i, j, l};
  ch.t = t;
  ch.minors = {MinorIndex{j, l}, {i, l}, {i, j}, {j, i}};
  ch.extra = {0, 0, 1, 1};
  ch.z0 = Vec4(b0(i, j) * b0(l, i) / b0(l, j), b0(j, i) * b0(l, j) / b0(l, i), 0.0, 0.0);
  ch.map = [&c, t, i, j, l, m1, m2, s, xl0](const Vec4& z) {
    Covector xi = Covector::Zero(5), y = Covector::Zero(5);
    xi(m2) = 1.0;
    xi(m1) = s + t * z(3);
    const double x[3] = {z(0), z(1), xl0 + t * z(2)};
    const int zs[3] = {i, j, l};
    for (int q = 0; q < 3; ++q) {
      const int p = zs[q];
      y(p) = x[q] - c(p, m1, p) * xi(m1) - c(p, m2, p);
      xi(p) = t * y(p);
    }
    return std::pair{xi, y};
  };
  return ch;
}

/// Case 3 (zeros q1..q4, direction e_m, n = 5), one chart per real root of
/// the quadratic. Unknowns are the rescaled diagonal z with xi_m = 1.
inline Chart case3_chart(const ParamSet& c, double t, const LimitPoint& seed, int root) {
  if (c.n() != 5) throw Error(ErrorCode::WrongDimension, "case-3 chart needs n = 5");
  if (root < 0 || root >= static_cast<int>(seed.zbar.size()))
    throw Error(ErrorCode::IndexOutOfRange, "case-3 root index out of range");
  const std::array<int, 4> q{seed.zeros[0], seed.zeros[1], seed.zeros[2], seed.zeros[3]};
  const int m = detail::complement(5, {q[0], q[1], q[2], q[3]})[0];
  Chart ch;
  ch.case_id = 3;
  ch.zeros = seed.zeros;
  ch.t = t;
  const int r = q[seed.free_pair[0]], s = q[seed.free_pair[1]];
  ch.minors = {MinorIndex{r, r}, {r, s}, {s, r}, {s, s}};
  ch.extra = {0, 0, 0, 0};
  const auto& zb = seed.zbar[root];
  ch.z0 = Vec4(zb[0], zb[1], zb[2], zb[3]);
  ch.map = [&c, t, q, m](const Vec4& z) {
    Covector xi = Covector::Zero(5), y = Covector::Zero(5);
    xi(m) = 1.0;
    for (int a = 0; a < 4; ++a) {
      y(q[a]) = z(a) - c(q[a], m, q[a]);
      xi(q[a]) = t * y(q[a]);
    }
    return std::pair{xi, y};
  };
  return ch;
}

/// The targeted minors as a function on chart coordinates.
inline std::function<Vec4(const Vec4&)> four_minor_system(const ParamSet& c, const Chart& chart) {
  return [&c, chart](const Vec4& z) { return chart_residual(c, chart, z); };
}

// ---------------------------------------------------------------------------
// Newton

struct NewtonOptions {
  int max_iter = 50;
  double step_tol = 1e-12;      // on |d xi| / |xi|
  double residual_tol = 1e-10;  // on |F|, relative to the chart scale
  double fd_step = 1e-7;
};

struct NewtonResult {
  Vec4 z = Vec4::Zero();
  double residual = INFINITY;
  int iters = 0;
  bool converged = false;
  double jacobian_rcond = 0.0;  // at the start point
};

inline Eigen::Matrix4d fd_jacobian(const std::function<Vec4(const Vec4&)>& f, const Vec4& z, double h0) {
  Eigen::Matrix4d jac;
  for (int k = 0; k < 4; ++k) {
    const double h = h0 * std::max(1.0, std::abs(z(k)));
    Vec4 zp = z, zm = z;
    zp(k) += h;
    zm(k) -= h;
    jac.col(k) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return jac;
}

/// Reciprocal condition number after scaling rows and columns to unit
/// max-norm, so that a chart with one large coordinate is not flagged.
inline double rcond4(Eigen::Matrix4d jac) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < 4; ++k) {
      const double m = jac.col(k).cwiseAbs().maxCoeff();
      if (m > 0.0) jac.col(k) /= m;
    }
    for (int k = 0; k < 4; ++k) {
      const double m = jac.row(k).cwiseAbs().maxCoeff();
      if (m > 0.0) jac.row(k) /= m;
    }
  }
  const auto sv = Eigen::JacobiSVD<Eigen::Matrix4d>(jac).singularValues();
  return sv(0) > 0.0 ? sv(3) / sv(0) : 0.0;
}

/// Damped Newton (Armijo backtracking on |F|^2). Stops when the xi-step
/// stalls, the residual reaches roundoff, or backtracking fails; `converged`
/// then reports whether |F| <= residual_tol * fscale.
inline NewtonResult damped_newton(const std::function<Vec4(const Vec4&)>& f,
                                  const std::function<Covector(const Vec4&)>& xi_of, Vec4 z, double fscale,
                                  NewtonOptions opt = {}) {
  NewtonResult out;
  Vec4 fz = f(z);
  out.jacobian_rcond = rcond4(fd_jacobian(f, z, opt.fd_step));
  for (int it = 1; it <= opt.max_iter; ++it) {
    out.iters = it;
    if (fz.norm() <= 1e-15 * fscale) break;
    const Eigen::Matrix4d jac = fd_jacobian(f, z, opt.fd_step);
    const Vec4 dz = jac.fullPivLu().solve(-fz);
    if (!dz.allFinite()) break;
    const double f0 = fz.squaredNorm();
    double lambda = 1.0;
    Vec4 zn = z + dz, fn = f(zn);
    for (int bt = 0; bt < 30 && !(fn.squaredNorm() <= (1.0 - 2e-4 * lambda) * f0); ++bt) {
      lambda *= 0.5;
      zn = z + lambda * dz;
      fn = f(zn);
    }
    if (!(fn.squaredNorm() <= f0)) break;
    const Covector x0 = xi_of(z), x1 = xi_of(zn);
    const double dxi = (x1 - x0).norm() / std::max(x1.norm(), 1e-300);
    z = zn;
    fz = fn;
    if (dxi <= opt.step_tol) break;
  }
  out.z = z;
  out.residual = fz.norm();
  out.converged = out.residual <= opt.residual_tol * fscale;
  return out;
}

// ---------------------------------------------------------------------------
// Certified points

struct SingularPoint {
  double t = 0.0;
  Covector xi;  // unit, largest-|.| coordinate positive
  LimitPoint seed;
  int root = 0;  // case 3: which quadratic root
  RankCertificate rank_cert;
  double minor_residual = 0.0;  // max |minor| of P(xi, t c) at unit xi
  double minor_tolerance = 0.0;
  double newton_residual = 0.0;
  int newton_iters = 0;
  ClosureReport closure;
  double seed_distance = 0.0;  // projective distance to the seed direction
  Covector y;                  // rescaled zero-pattern coordinates, same normalization as xi
  bool recovered = false;      // found by the local search rather than by continuation
};

/// Same point up to `radius`. Points from one zero pattern are compared in
/// chart coordinates (xi off the pattern, y on it), since distinct points
/// sharing a limit differ by O(t) in xi. Otherwise xi is compared with the
/// radius scaled by t / 10^-3.
inline bool same_singular_point(const SingularPoint& a, const SingularPoint& b, double radius = 1e-6) {
  if (a.seed.zeros == b.seed.zeros && a.y.size() == a.xi.size() && b.y.size() == b.xi.size()) {
    Covector wa = a.xi, wb = b.xi;
    for (int q : a.seed.zeros) wa(q) = a.y(q), wb(q) = b.y(q);
    return std::min((wa - wb).cwiseAbs().maxCoeff(), (wa + wb).cwiseAbs().maxCoeff()) <= radius;
  }
  return same_projective_point(a.xi, b.xi, radius * std::min(1.0, a.t / 1e-3));
}

struct RefineOptions {
  NewtonOptions newton;
  double rank_tol = 1e-8;
  double minor_tol = 1e-8;
  bool check_genericity = true;
  double t_start = 1e-6;  // continuation starts here when t is larger
  int steps_per_decade = 4;
  int recovery_starts = 400;  // local restarts for seeds that fail or collide (0 disables)
};

/// Certifies a candidate and packages it. Minors in `targeted` seed the
/// closure report; the certificate itself uses the raw symbol at unit xi.
inline SingularPoint certify(const ParamSet& c, double t, const std::vector<int>& zeros,
                             const std::vector<MinorIndex>& targeted, const Covector& xi_raw, const Covector& y,
                             double residual, int iters, const LimitPoint& seed, int root,
                             const RefineOptions& opt) {
  SingularPoint sp;
  sp.t = t;
  sp.xi = unit_representative(xi_raw);
  sp.y = y * (sp.xi.dot(xi_raw) / xi_raw.squaredNorm());
  sp.seed = seed;
  sp.root = root;
  sp.newton_residual = residual;
  sp.newton_iters = iters;
  const ParamSet ct = scale(c, t);
  const Matrix p = assemble(ct, sp.xi).entries();
  sp.rank_cert = rank(p, opt.rank_tol);
  sp.minor_residual = max_minor(p);
  const double pscale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
  sp.minor_tolerance = opt.minor_tol * std::pow(std::max(pscale, 1.0), c.n() - 1);
  sp.seed_distance = projective_distance(sp.xi, seed.coords);

  const Matrix ph = scaled_symbol(c, t, zeros, xi_raw, y);
  sp.closure = close_minors(ph, targeted, opt.rank_tol);

  if (sp.minor_residual > sp.minor_tolerance || sp.rank_cert.rank > c.n() - 2) {
    std::string blocks;
    for (const auto& b : sp.closure.failed_blocks) blocks += (blocks.empty() ? "" : "; ") + b;
    throw Error(ErrorCode::LemmaHypothesisFailure,
                "untargeted minor " + std::to_string(sp.minor_residual) + " above tolerance; blocks: " +
                    (blocks.empty() ? std::string("none flagged") : blocks));
  }
  return sp;
}

/// Size of roundoff in a targeted minor: entries of P-hat to the power n - 1.
inline double chart_scale(const ParamSet& c, const Chart& ch, const Vec4& z) {
  const auto [xi, y] = ch.map(z);
  const double m = scaled_symbol(c, ch.t, ch.zeros, xi, y).cwiseAbs().maxCoeff();
  return std::pow(std::max(1.0, m), c.n() - 1);
}

// ---------------------------------------------------------------------------
// Bordered formulation
//
// rank P-hat <= n - 2 near a point where U, V approximate the two smallest
// singular pairs is equivalent to the vanishing of the 2 x 2 block G in
//   [P-hat U; V^T 0]^{-1} = [* *; * G].
// Unknowns are y_q (q in Z) and xi_r (r outside Z, r != m) with xi_m = 1.
// The formulation makes no asymptotic assumption, so it carries chart
// solutions found at small t up to larger t.

class BorderedSystem {
 public:
  BorderedSystem(const ParamSet& c, double t, std::vector<int> zeros, int m)
      : c_(c), t_(t), zeros_(std::move(zeros)), m_(m) {
    const int n = c.n();
    in_zero_.assign(n, false);
    for (int q : zeros_) in_zero_[q] = true;
    for (int r = 0; r < n; ++r)
      if (r != m_) vars_.push_back(r);
  }

  int unknowns() const { return static_cast<int>(vars_.size()); }
  int pivot() const { return m_; }
  const std::vector<int>& zeros() const { return zeros_; }

  std::pair<Covector, Covector> point(const Eigen::VectorXd& v) const {
    const int n = c_.n();
    Covector xi = Covector::Zero(n), y = Covector::Zero(n);
    xi(m_) = 1.0;
    for (int k = 0; k < unknowns(); ++k) {
      const int r = vars_[k];
      if (in_zero_[r]) {
        y(r) = v(k);
        xi(r) = t_ * v(k);
      } else {
        xi(r) = v(k);
      }
    }
    return {xi, y};
  }

  /// Unknowns for a point with xi_m != 0; the point is rescaled to xi_m = 1.
  Eigen::VectorXd unknowns_of(const Covector& xi, const Covector& y) const {
    const double s = xi(m_);
    Eigen::VectorXd v(unknowns());
    for (int k = 0; k < unknowns(); ++k) {
      const int r = vars_[k];
      v(k) = in_zero_[r] ? y(r) / s : xi(r) / s;
    }
    return v;
  }

  Matrix matrix(const Eigen::VectorXd& v) const {
    const auto [xi, y] = point(v);
    return scaled_symbol(c_, t_, zeros_, xi, y);
  }

  /// Chooses the bordering vectors from the SVD at v.
  void border_at(const Eigen::VectorXd& v) {
    const int n = c_.n();
    const Eigen::JacobiSVD<Matrix> svd(matrix(v), Eigen::ComputeFullU | Eigen::ComputeFullV);
    u_ = svd.matrixU().rightCols(2);
    w_ = svd.matrixV().rightCols(2);
    scale_ = std::max(svd.singularValues()(0), 1e-300);
    (void)n;
  }

  double scale() const { return scale_; }

  Eigen::Vector4d residual(const Eigen::VectorXd& v) const {
    const int n = c_.n();
    Matrix m = Matrix::Zero(n + 2, n + 2);
    m.topLeftCorner(n, n) = matrix(v);
    m.topRightCorner(n, 2) = u_ * scale_;
    m.bottomLeftCorner(2, n) = w_.transpose() * scale_;
    Matrix rhs = Matrix::Zero(n + 2, 2);
    rhs.bottomRows(2) = Eigen::Matrix2d::Identity();
    const Matrix x = m.partialPivLu().solve(rhs);
    // G scales like 1 / scale; multiply back so the residual has the units of P-hat.
    const Matrix g = -x.bottomRows(2) * scale_ * scale_;
    return Eigen::Vector4d(g(0, 0), g(0, 1), g(1, 0), g(1, 1));
  }

 private:
  const ParamSet& c_;
  double t_;
  std::vector<int> zeros_;
  int m_;
  std::vector<bool> in_zero_;
  std::vector<int> vars_;
  Matrix u_, w_;
  double scale_ = 1.0;
};

struct BorderedResult {
  Eigen::VectorXd v;
  double residual = INFINITY;  // max |G| relative to sigma_1(P-hat)
  int iters = 0;
  bool converged = false;
};

/// Gauss-Newton with minimum-norm steps (the system is underdetermined for
/// n > 5) and Armijo backtracking.
inline BorderedResult bordered_newton(BorderedSystem& sys, Eigen::VectorXd v, const NewtonOptions& opt) {
  sys.border_at(v);
  const int k = sys.unknowns();
  BorderedResult out;
  Eigen::Vector4d g = sys.residual(v);
  for (int it = 1; it <= opt.max_iter; ++it) {
    out.iters = it;
    if (g.cwiseAbs().maxCoeff() <= 1e-15 * sys.scale()) break;
    Eigen::MatrixXd jac(4, k);
    for (int q = 0; q < k; ++q) {
      const double h = opt.fd_step * std::max(1.0, std::abs(v(q)));
      Eigen::VectorXd vp = v, vm = v;
      vp(q) += h;
      vm(q) -= h;
      jac.col(q) = (sys.residual(vp) - sys.residual(vm)) / (2.0 * h);
    }
    const Eigen::VectorXd dv = jac.completeOrthogonalDecomposition().solve(-g);
    if (!dv.allFinite()) break;
    const double g0 = g.squaredNorm();
    double lambda = 1.0;
    Eigen::VectorXd vn = v + dv;
    Eigen::Vector4d gn = sys.residual(vn);
    for (int bt = 0; bt < 30 && !(gn.squaredNorm() <= (1.0 - 2e-4 * lambda) * g0); ++bt) {
      lambda *= 0.5;
      vn = v + lambda * dv;
      gn = sys.residual(vn);
    }
    if (!(gn.squaredNorm() <= g0)) break;
    const double step = (lambda * dv).norm() / std::max(1.0, vn.norm());
    v = vn;
    g = gn;
    if (step <= opt.step_tol) break;
  }
  out.v = v;
  out.residual = g.cwiseAbs().maxCoeff() / sys.scale();
  out.converged = out.residual <= opt.residual_tol;
  return out;
}

/// Index outside `zeros` carrying the largest |xi|.
inline int pivot_coordinate(const Covector& xi, const std::vector<int>& zeros) {
  int m = -1;
  for (int r = 0; r < xi.size(); ++r) {
    if (std::find(zeros.begin(), zeros.end(), r) != zeros.end()) continue;
    if (m < 0 || std::abs(xi(r)) > std::abs(xi(m))) m = r;
  }
  return m;
}

using ChartFactory = std::function<Chart(double)>;

/// Two stages. The chart is solved at t0 = min(t, t_start), where its
/// leading-order seed is accurate. The bordered system then follows the
/// point from t0 up to t, with `steps_per_decade` steps per factor of 10 and
/// a secant predictor.
inline SingularPoint refine_chart(const ParamSet& c, const ChartFactory& make, double t, const LimitPoint& seed,
                                  int root, const RefineOptions& opt) {
  const double t0 = std::min(t, opt.t_start);
  const Chart ch = make(t0);
  const auto f = four_minor_system(c, ch);
  const double rc = rcond4(fd_jacobian(f, ch.z0, opt.newton.fd_step));
  if (rc <= 1e-10)
    throw Error(ErrorCode::NotGeneric,
                "chart Jacobian is singular at the seed (rcond " + std::to_string(rc) + ")");
  const auto xi_of = [&ch](const Vec4& w) { return ch.map(w).first; };
  const NewtonResult nr = damped_newton(f, xi_of, ch.z0, chart_scale(c, ch, ch.z0), opt.newton);
  auto [xi, y] = ch.map(nr.z);

  std::vector<double> ts{t0};
  const double ratio = std::pow(10.0, 1.0 / std::max(1, opt.steps_per_decade));
  for (double s = t0 * ratio; s < t / std::sqrt(ratio); s *= ratio) ts.push_back(s);
  if (t > t0) ts.push_back(t);

  std::vector<std::pair<double, Eigen::VectorXd>> path;
  int m = pivot_coordinate(xi, ch.zeros);
  BorderedResult br;
  for (double s : ts) {
    BorderedSystem sys(c, s, ch.zeros, m);
    Eigen::VectorXd start = sys.unknowns_of(xi, y);
    if (path.size() >= 2) {
      const auto& [ta, va] = path[path.size() - 2];
      const auto& [tb, vb] = path.back();
      start = vb + (s - tb) / (tb - ta) * (vb - va);
    }
    br = bordered_newton(sys, start, opt.newton);
    if (!br.converged)
      throw Error(ErrorCode::NoConvergence, "branch lost at t = " + std::to_string(s) + " (residual " +
                                                std::to_string(br.residual) + " after " +
                                                std::to_string(br.iters) + " iterations)");
    std::tie(xi, y) = sys.point(br.v);
    // Keep xi_m the dominant free coordinate; restart the predictor if it moves.
    const int m_next = pivot_coordinate(xi, ch.zeros);
    if (std::abs(xi(m_next)) > 2.0 * std::abs(xi(m))) {
      m = m_next;
      path.clear();
    } else {
      path.emplace_back(s, br.v);
    }
  }
  return certify(c, t, ch.zeros, {ch.minors.begin(), ch.minors.end()}, xi, y, br.residual, br.iters, seed, root,
                 opt);
}

/// Refines one seed of the limit set at scale t. Case-3 seeds need `root`.
inline SingularPoint refine(const ParamSet& c, double t, const LimitPoint& seed, int root = 0,
                            RefineOptions opt = {}) {
  if (!(t > 0.0)) throw Error(ErrorCode::Usage, "t must be positive");
  switch (seed.case_id) {
    case 1: {
      const int i = seed.zeros.at(0), j = seed.zeros.at(1);
      if (opt.check_genericity) {
        const auto rep = check_cond12(c, i, j);
        if (!rep.passed) {
          const bool pair = rep.violations.front().condition == "cond1";
          throw Error(pair ? ErrorCode::DegeneratePair : ErrorCode::NotGeneric,
                      "pair " + detail::pattern_name({i, j}) + " fails " + rep.violations.front().condition);
        }
      }
      return refine_chart(
          c, [&](double s) { return case1_chart(c, s, i, j, seed.coords); }, t, seed, 0, opt);
    }
    case 2:
      return refine_chart(c, [&](double s) { return case2_chart(c, s, seed); }, t, seed, 0, opt);
    case 3:
      return refine_chart(c, [&](double s) { return case3_chart(c, s, seed, root); }, t, seed, root, opt);
    default:
      throw Error(ErrorCode::Usage, "unknown limit-point case");
  }
}

// ---------------------------------------------------------------------------
// Counting for n = 5

struct SeedFailure {
  LimitPoint seed;
  int root = 0;
  ErrorCode code = ErrorCode::NotFound;
  std::string detail;
};

struct DetectionResult {
  double t = 0.0;
  int count = 0;
  std::vector<SingularPoint> points;
  std::vector<SeedFailure> failures;
  std::vector<Degeneracy> limit_failures;  // patterns the limit solvers rejected
  int duplicates = 0;
  int recovered = 0;  // points added by the local search
};

struct SeedTask {
  LimitPoint seed;
  int root = 0;
};

inline std::vector<SeedTask> seed_tasks(const ParamSet& c, std::vector<Degeneracy>* rejected = nullptr) {
  std::vector<SeedTask> tasks;
  auto take = [&](LimitSet s) {
    if (rejected) rejected->insert(rejected->end(), s.failures.begin(), s.failures.end());
    for (auto& p : s.points) {
      if (p.case_id == 3) {
        for (int r = 0; r < static_cast<int>(p.zbar.size()); ++r) tasks.push_back({p, r});
      } else {
        tasks.push_back({p, 0});
      }
    }
  };
  take(case1_points(c));
  take(case2_points(c));
  take(case3_points(c));
  return tasks;
}

/// Multi-start bordered Newton at scale t around a seed: y on the zero
/// pattern drawn around the chart values, the other coordinates around the
/// seed direction with spread sqrt(t). Runs may wander to other parts of
/// the locus; every accepted point is certified, so those are kept too.
inline std::vector<SingularPoint> local_search(const ParamSet& c, double t, const LimitPoint& seed, int root,
                                               int starts, std::uint64_t rng_seed, const RefineOptions& opt) {
  const int n = c.n();
  const int m = pivot_coordinate(seed.coords, seed.zeros);
  std::vector<bool> in_zero(n, false);
  for (int q : seed.zeros) in_zero[q] = true;
  Covector y0 = Covector::Zero(n);
  if (seed.case_id == 3 && root < static_cast<int>(seed.zbar.size()))
    for (int k = 0; k < 4; ++k) y0(seed.zeros[k]) = seed.zbar[root][k];
  const double spread_y = 3.0 * std::max(1.0, y0.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> g;
  std::vector<SingularPoint> out;
  for (int k = 0; k < starts; ++k) {
    BorderedSystem sys(c, t, seed.zeros, m);
    Covector xi = seed.coords / seed.coords(m), y = Covector::Zero(n);
    for (int r = 0; r < n; ++r) {
      if (r == m) continue;
      if (in_zero[r]) y(r) = y0(r) + spread_y * g(rng);
      else xi(r) += 2.0 * std::sqrt(t) * g(rng);
    }
    BorderedResult br;
    try {
      br = bordered_newton(sys, sys.unknowns_of(xi, y), opt.newton);
    } catch (const Error&) {
      continue;
    }
    if (!br.converged) continue;
    const auto [xf, yf] = sys.point(br.v);
    try {
      SingularPoint sp = certify(c, t, seed.zeros, {}, xf, yf, br.residual, br.iters, seed, root, opt);
      sp.recovered = true;
      bool dup = false;
      for (const auto& q : out) dup = dup || same_singular_point(q, sp);
      if (!dup) out.push_back(std::move(sp));
    } catch (const Error&) {
    }
  }
  return out;
}

inline DetectionResult count_detected(const ParamSet& c, double t, RefineOptions opt = {}, int threads = 0) {
  if (c.n() != 5) throw Error(ErrorCode::WrongDimension, "count_detected needs n = 5");
  DetectionResult res;
  res.t = t;
  const auto tasks = seed_tasks(c, &res.limit_failures);
  using Outcome = std::pair<std::optional<SingularPoint>, std::optional<SeedFailure>>;
  const auto outcomes = parallel_map(
      tasks.size(),
      [&](std::size_t k) -> Outcome {
        try {
          return {refine(c, t, tasks[k].seed, tasks[k].root, opt), std::nullopt};
        } catch (const Error& e) {
          return {std::nullopt, SeedFailure{tasks[k].seed, tasks[k].root, e.code(), e.what()}};
        }
      },
      threads);
  // Index of the point `p` coincides with, or -1 after appending it.
  auto absorb = [&res](const SingularPoint& p) {
    for (std::size_t q = 0; q < res.points.size(); ++q)
      if (same_singular_point(res.points[q], p)) return static_cast<int>(q);
    res.points.push_back(p);
    return -1;
  };
  std::vector<std::size_t> owner;  // task behind each continuation point
  std::set<std::size_t> suspect;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& [pt, fail] = outcomes[k];
    if (fail) {
      res.failures.push_back(*fail);
      suspect.insert(k);
    } else if (pt) {
      const int hit = absorb(*pt);
      if (hit < 0) {
        owner.push_back(k);
      } else {
        // Two seeds met: either may have been pulled onto the other's branch.
        ++res.duplicates;
        suspect.insert(k);
        suspect.insert(owner[hit]);
      }
    }
  }
  const std::vector<std::size_t> trouble(suspect.begin(), suspect.end());
  // A failed or colliding seed may still have a point of its own nearby.
  if (opt.recovery_starts > 0 && !trouble.empty()) {
    const auto found = parallel_map(
        trouble.size(),
        [&](std::size_t k) {
          const auto& task = tasks[trouble[k]];
          return local_search(c, t, task.seed, task.root, opt.recovery_starts, 0x5EEDULL + trouble[k], opt);
        },
        threads);
    for (const auto& pts : found)
      for (const auto& p : pts) res.recovered += absorb(p) < 0;
  }
  res.count = static_cast<int>(res.points.size());
  return res;
}

// ---------------------------------------------------------------------------
// Surfaces for n >= 6

struct TransverseGrid {
  int nodes = 50;         // per transverse dimension
  double margin = 0.15;   // fraction of the admissible arc left out at each end
};

struct SurfaceNode {
  std::vector<double> param;
  Covector seed;
  std::optional<SingularPoint> point;
  std::string failure;
};

struct SurfaceTrace {
  int i = 0, j = 0;
  double t = 0.0;
  double spacing = 0.0;  // distance between neighbouring seeds
  std::vector<SurfaceNode> nodes;
  int converged() const {
    int k = 0;
    for (const auto& nd : nodes) k += nd.point.has_value();
    return k;
  }
};

/// The (EqnB)-type requirement at a family point: for every p outside
/// {i, j}, b_pi(a) or b_pj(a) is nonzero.
inline bool family_point_admissible(const ParamSet& c, int i, int j, const Covector& a, double rel = 1e-8) {
  const auto rest = detail::complement(c.n(), {i, j});
  const double amax = a.cwiseAbs().maxCoeff();
  for (int r : rest)
    if (std::abs(a(r)) <= rel * amax) return false;
  const Matrix b = b_matrix(c, a);
  const double s = std::max(c.max_abs(), 1e-300) * amax;
  for (int p : rest)
    if (std::abs(b(p, i)) <= rel * s && std::abs(b(p, j)) <= rel * s) return false;
  return true;
}

inline SingularPoint refine_family_point(const ParamSet& c, double t, int i, int j, const Covector& a,
                                         RefineOptions opt) {
  LimitPoint lp;
  lp.zeros = {i, j};
  lp.coords = normalize_projective(a);
  lp.case_id = 1;
  return refine_chart(c, [&](double s) { return case1_chart(c, s, i, j, a); }, t, lp, 0, opt);
}

/// Traces the Case-1 family attached to (i, j). For n = 6 the family is a
/// projective line; nodes sit on the longest arc free of vanishing
/// coordinates. For n > 6 a tensor grid of affine offsets around a base point
/// of the family is used.
inline SurfaceTrace surface_trace(const ParamSet& c, double t, int i, int j, TransverseGrid grid = {},
                                  RefineOptions opt = {}, int threads = 0) {
  const int n = c.n();
  if (n < 5) throw Error(ErrorCode::WrongDimension, "surface_trace needs n >= 5");
  if (i > j) std::swap(i, j);
  SurfaceTrace tr;
  tr.i = i;
  tr.j = j;
  tr.t = t;
  const auto rep = check_cond12(c, i, j);
  if (!rep.passed)
    throw Error(rep.violations.front().condition == "cond1" ? ErrorCode::DegeneratePair : ErrorCode::NotGeneric,
                "pair " + detail::pattern_name({i, j}) + " fails " + rep.violations.front().condition);
  const Case1Family fam = case1_family(c, i, j);
  const int dim = n - 5;

  if (dim == 0) {
    SurfaceNode nd;
    nd.seed = fam.basis.col(0);
    try {
      nd.point = refine_family_point(c, t, i, j, nd.seed, opt);
    } catch (const Error& e) {
      nd.failure = e.what();
    }
    tr.nodes.push_back(std::move(nd));
    return tr;
  }

  std::vector<std::vector<double>> params;
  std::vector<Covector> seeds;
  if (dim == 1) {
    // a(theta) = cos(theta) v1 + sin(theta) v2; coordinate r vanishes where
    // tan(theta) = -v1_r / v2_r.
    const Covector v1 = fam.basis.col(0), v2 = fam.basis.col(1);
    std::vector<double> bad;
    for (int r : detail::complement(n, {i, j})) {
      double th = std::atan2(-v1(r), v2(r));
      if (th < 0) th += M_PI;
      if (th >= M_PI) th -= M_PI;
      bad.push_back(th);
    }
    std::sort(bad.begin(), bad.end());
    double lo = 0, width = -1;
    for (std::size_t k = 0; k < bad.size(); ++k) {
      const double a = bad[k], b = k + 1 < bad.size() ? bad[k + 1] : bad[0] + M_PI;
      if (b - a > width) width = b - a, lo = a;
    }
    const double start = lo + grid.margin * width, len = (1.0 - 2.0 * grid.margin) * width;
    for (int k = 0; k < grid.nodes; ++k) {
      const double th = start + len * k / std::max(1, grid.nodes - 1);
      params.push_back({th});
      seeds.push_back(std::cos(th) * v1 + std::sin(th) * v2);
    }
    tr.spacing = len / std::max(1, grid.nodes - 1);
  } else {
    // Base point: the basis combination with the largest smallest coordinate.
    Covector base = fam.basis.col(0);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> g;
    auto quality = [&](const Covector& a) {
      double q = INFINITY;
      for (int r : detail::complement(n, {i, j})) q = std::min(q, std::abs(a(r)));
      return q / a.norm();
    };
    for (int trial = 0; trial < 2000; ++trial) {
      Covector w(n - 4);
      for (int k = 0; k < w.size(); ++k) w(k) = g(rng);
      const Covector a = fam.basis * w;
      if (quality(a) > quality(base)) base = a;
    }
    base.normalize();
    Matrix tangent(n, dim);
    int col = 0;
    for (int k = 0; k < n - 4 && col < dim; ++k) {
      Covector v = fam.basis.col(k);
      v -= v.dot(base) * base;
      for (int q = 0; q < col; ++q) v -= v.dot(tangent.col(q)) * tangent.col(q);
      if (v.norm() > 1e-8) tangent.col(col++) = v.normalized();
    }
    const double w = 0.5 * quality(base);
    const int per = grid.nodes;
    int total = 1;
    for (int d = 0; d < dim; ++d) total *= per;
    for (int idx = 0; idx < total; ++idx) {
      std::vector<double> s(dim);
      Covector a = base;
      for (int d = 0, rem = idx; d < dim; ++d, rem /= per) {
        s[d] = -w + 2.0 * w * (rem % per) / std::max(1, per - 1);
        a += s[d] * tangent.col(d);
      }
      params.push_back(s);
      seeds.push_back(a.normalized());
    }
    tr.spacing = 2.0 * w / std::max(1, per - 1);
  }

  tr.nodes = parallel_map(
      seeds.size(),
      [&](std::size_t k) {
        SurfaceNode nd;
        nd.param = params[k];
        nd.seed = seeds[k];
        if (!family_point_admissible(c, i, j, seeds[k])) {
          nd.failure = "seed violates the nonvanishing requirements";
          return nd;
        }
        try {
          nd.point = refine_family_point(c, t, i, j, seeds[k], opt);
        } catch (const Error& e) {
          nd.failure = e.what();
        }
        return nd;
      },
      threads);
  return tr;
}

/// Longest distance between consecutive converged nodes (n = 6 traces).
inline double max_consecutive_gap(const SurfaceTrace& tr) {
  double gap = 0.0;
  const Covector* prev = nullptr;
  for (const auto& nd : tr.nodes) {
    if (!nd.point) continue;
    if (prev) gap = std::max(gap, projective_distance(*prev, nd.point->xi));
    prev = &nd.point->xi;
  }
  return gap;
}

/// Least-squares slope of log y against log x. NaN when fewer than two
/// positive pairs are available.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k)
    if (x[k] > 0.0 && y[k] > 0.0) pts.emplace_back(std::log(x[k]), std::log(y[k]));
  if (pts.size() < 2) return NAN;
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : pts) mx += a, my += b;
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [a, b] : pts) sxy += (a - mx) * (b - my), sxx += (a - mx) * (a - mx);
  return sxx > 0.0 ? sxy / sxx : NAN;
}

}  // namespace charvar
