#pragma once

// Global searches on the sphere: points of Sigma(c) along great circles,
// the n = 4 smoothness scan, and a witness that Sigma(c) is nonempty.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "charvar/error.hpp"
#include "charvar/parallel.hpp"
#include "charvar/params.hpp"
#include "charvar/symbol.hpp"

namespace charvar {

inline Covector random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Covector v(n);
  for (int k = 0; k < n; ++k) v(k) = g(rng);
  return v.normalized();
}

/// det P along the great circle cos(th) u + sin(th) w.
struct CircleDet {
  const ParamSet& c;
  Covector u, w;
  Covector at(double th) const { return std::cos(th) * u + std::sin(th) * w; }
  double operator()(double th) const { return det(assemble(c, at(th))); }
};

/// Bisection on a bracketing interval down to `tol` in angle.
inline double bisect(const CircleDet& f, double lo, double hi, double flo, double tol = 1e-12) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Newton polish of det = 0 along the gradient direction, staying on the
/// unit sphere. Keeps the input if a step would not reduce |det|.
inline Covector polish_on_sphere(const ParamSet& c, Covector xi, int steps = 3) {
  xi.normalize();
  double d = det(assemble(c, xi));
  for (int k = 0; k < steps && d != 0.0; ++k) {
    Covector g = grad_det(c, xi);
    g -= g.dot(xi) * xi;  // tangent part
    const double gg = g.squaredNorm();
    if (!(gg > 0.0)) break;
    const Covector cand = (xi - d / gg * g).normalized();
    const double dc = det(assemble(c, cand));
    if (!(std::abs(dc) < std::abs(d))) break;
    xi = cand;
    d = dc;
  }
  return xi;
}

// ---------------------------------------------------------------------------
// n = 4 smoothness

struct SmoothnessReport {
  double t = 0.0;
  int circles = 0;
  int samples = 0;             // Sigma-points located
  int requested = 0;
  bool coverage_ok = false;    // samples >= requested
  double min_grad = INFINITY;  // min |grad det| / (t |xi|^{n-1})
  double min_grad_raw = INFINITY;
  double min_sigma_ratio = INFINITY;  // min sigma_{n-1} / sigma_1
  int min_rank = 4;
  int pattern_hits = 0;        // coordinate 2-plane probes lying on Sigma
  bool singular_found = false;
  double grad_threshold = 1e-8;
  double rank_tol = 1e-8;
  Covector worst_xi;
};

struct ScanOptions {
  int grid = 512;  // angular samples per half circle
  double rank_tol = 1e-8;
  double grad_threshold = 1e-8;
  std::uint64_t seed = 1;
  int min_circles = 256;
};

/// Gradient normalization used by the scan. Near a crossing of two coordinate
/// hyperplanes Sigma(t c) looks like xi_i xi_j = t^2 K, where the gradient is
/// of size t, so the gradient is measured in units of t.
inline double normalized_gradient(const Covector& grad, const Covector& xi, double t) {
  const int n = static_cast<int>(xi.size());
  return grad.norm() / (std::max(t, 1e-300) * std::pow(xi.norm(), n - 1));
}

inline SmoothnessReport smooth_scan_n4(const ParamSet& c, double t, int samples, ScanOptions opt = {},
                                       int threads = 0) {
  if (c.n() != 4) throw Error(ErrorCode::WrongDimension, "smooth_scan_n4 needs n = 4");
  const ParamSet ct = scale(c, t);
  SmoothnessReport rep;
  rep.t = t;
  rep.requested = samples;
  rep.grad_threshold = opt.grad_threshold;
  rep.rank_tol = opt.rank_tol;

  struct Hit {
    Covector xi;
    double grad, grad_raw, ratio;
    int rank;
  };
  auto examine = [&](const Covector& xi) {
    const Covector g = grad_det(ct, xi);
    const RankCertificate rc = rank(assemble(ct, xi), opt.rank_tol);
    const auto& sv = rc.singular_values;
    return Hit{xi, normalized_gradient(g, xi, t), g.norm(), sv(sv.size() - 2) / sv(0), rc.rank};
  };
  auto absorb = [&](const Hit& h) {
    ++rep.samples;
    if (h.grad < rep.min_grad) rep.min_grad = h.grad, rep.worst_xi = h.xi;
    rep.min_grad_raw = std::min(rep.min_grad_raw, h.grad_raw);
    rep.min_sigma_ratio = std::min(rep.min_sigma_ratio, h.ratio);
    rep.min_rank = std::min(rep.min_rank, h.rank);
    if (h.rank <= 2 || h.grad < opt.grad_threshold) rep.singular_found = true;
  };

  // Probes at the crossings of coordinate hyperplanes, e.g. e_i + e_j.
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Covector xi = Covector::Zero(4);
      for (int k = 0; k < 4; ++k)
        if (k != i && k != j) xi(k) = 1.0;
      xi.normalize();
      const Matrix p = assemble(ct, xi).entries();
      if (std::abs(det(p)) <= 1e-14 * std::pow(std::max(1.0, p.cwiseAbs().maxCoeff()), 4)) {
        ++rep.pattern_hits;
        absorb(examine(xi));
      }
    }

  // Great circles in batches until enough Sigma-points are found.
  const int batch = std::max(1, opt.min_circles);
  std::uint64_t next_circle = 0;
  while (rep.circles < opt.min_circles || rep.samples < samples) {
    const auto hits = parallel_map(
        batch,
        [&](std::size_t k) {
          std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + next_circle + k);
          const Covector u = random_unit(4, rng);
          Covector w = random_unit(4, rng);
          w -= w.dot(u) * u;
          w.normalize();
          const CircleDet f{ct, u, w};
          std::vector<Hit> out;
          double prev = f(0.0);
          for (int s = 1; s <= opt.grid; ++s) {
            const double th = M_PI * s / opt.grid, cur = f(th);
            if (cur == 0.0 || (cur < 0) != (prev < 0)) {
              const double root = cur == 0.0 ? th : bisect(f, M_PI * (s - 1) / opt.grid, th, prev);
              out.push_back(examine(polish_on_sphere(ct, f.at(root))));
            }
            prev = cur;
          }
          return out;
        },
        threads);
    next_circle += batch;
    rep.circles += batch;
    for (const auto& hs : hits)
      for (const auto& h : hs) absorb(h);
    if (rep.circles > 1000000) break;
  }
  rep.coverage_ok = rep.samples >= samples;
  return rep;
}

// ---------------------------------------------------------------------------
// Nonemptiness witness

struct Witness {
  Covector xi;
  double residual = 0.0;  // |det| / sigma_1^n at unit xi
  std::string method;
  int attempts = 0;
};

inline double witness_residual(const ParamSet& c, const Covector& xi) {
  const Covector u = xi.normalized();
  const Matrix p = assemble(c, u).entries();
  const double s1 = Eigen::JacobiSVD<Matrix>(p).singularValues()(0);
  if (s1 == 0.0) return 0.0;
  return std::abs(det(p)) / std::pow(s1, c.n());
}

/// A nonzero xi with det P(xi, c) = 0 to the stated tolerance.
inline Witness nonempty_witness(const ParamSet& c, double tol = 1e-10, std::uint64_t seed = 1,
                                int budget = 20000) {
  const int n = c.n();
  Witness w;
  for (int k = 0; k < n; ++k) {
    const Covector e = Covector::Unit(n, k);
    if (witness_residual(c, e) <= tol && det(assemble(c, e)) == 0.0) {
      w.xi = e;
      w.residual = witness_residual(c, e);
      w.method = "coordinate";
      return w;
    }
  }
  std::mt19937_64 rng(seed);
  auto finish = [&](const CircleDet& f, double lo, double hi, double flo, const char* method) {
    const double root = bisect(f, lo, hi, flo, 1e-15);
    Covector xi = polish_on_sphere(c, f.at(root), 4);
    w.xi = xi;
    w.residual = witness_residual(c, xi);
    w.method = method;
  };

  if (n % 2 == 1) {
    // det(-xi) = -det(xi): any half circle from u to -u brackets a root.
    for (int attempt = 1; attempt <= 16; ++attempt) {
      w.attempts = attempt;
      const Covector u = random_unit(n, rng);
      Covector v = random_unit(n, rng);
      v -= v.dot(u) * u;
      v.normalize();
      const CircleDet f{c, u, v};
      const double f0 = f(0.0);
      if (f0 == 0.0) {
        w.xi = u;
        w.residual = witness_residual(c, u);
        w.method = "antipodal";
        return w;
      }
      finish(f, 0.0, M_PI, f0, "antipodal");
      if (w.residual <= tol) return w;
    }
    throw Error(ErrorCode::NotFound, "antipodal bisection did not reach tolerance");
  }

  // Even n: look for a sign change between random directions.
  Covector pos, neg;
  bool have_pos = false, have_neg = false;
  Covector best;
  double best_val = INFINITY;
  for (int k = 0; k < budget && !(have_pos && have_neg); ++k) {
    w.attempts = k + 1;
    const Covector u = random_unit(n, rng);
    const double d = det(assemble(c, u));
    const double r = witness_residual(c, u);
    if (r < best_val) best_val = r, best = u;
    if (d > 0 && !have_pos) pos = u, have_pos = true;
    if (d < 0 && !have_neg) neg = u, have_neg = true;
    if (d == 0.0) {
      w.xi = u;
      w.residual = r;
      w.method = "sample";
      return w;
    }
  }
  if (have_pos && have_neg) {
    Covector v = neg - neg.dot(pos) * pos;
    if (v.norm() > 1e-12) {
      v.normalize();
      const double angle = std::atan2(neg.dot(v), neg.dot(pos));
      const CircleDet f{c, pos, v};
      finish(f, 0.0, angle, f(0.0), "sign-change");
      if (w.residual <= tol) return w;
    }
  }
  // Fallback: Newton on det = 0 from the best sample.
  Covector xi = polish_on_sphere(c, best, 60);
  w.xi = xi;
  w.residual = witness_residual(c, xi);
  w.method = "newton";
  if (w.residual <= tol) return w;
  throw Error(ErrorCode::NotFound, "no witness within a budget of " + std::to_string(budget) +
                                       " samples (best residual " + std::to_string(w.residual) + ")");
}

}  // namespace charvar
