#pragma once

// Linear-dependence bookkeeping for (n-1)x(n-1) minors.
//
// Row rule: deleting row r leaves n columns in R^{n-1}. If the minors (r, s1)
// and (r, s2) vanish and the other n-2 columns are independent, every minor
// (r, .) vanishes. The column rule is the transpose. Closing a set of known
// vanishing minors under both rules shows when a handful of equations forces
// all of them, and names the sub-block that blocks the deduction otherwise.

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "charvar/symbol.hpp"

namespace charvar {

using MinorIndex = std::pair<int, int>;  // (row, col), 0-based

/// Rank test for a block given by kept rows and columns. Full rank means
/// sigma_min > tol * sigma_max.
inline bool block_full_rank(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols,
                            double tol) {
  Matrix b(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t c = 0; c < cols.size(); ++c) b(a, c) = m(rows[a], cols[c]);
  const auto sv = Eigen::JacobiSVD<Matrix>(b).singularValues();
  if (sv.size() == 0) return true;
  return sv(0) > 0.0 && sv(sv.size() - 1) > tol * sv(0);
}

/// Scales every row and then every column to unit max-norm. Vanishing of
/// minors and ranks of sub-blocks are unchanged; conditioning improves when
/// rows live on different scales (e.g. rows of size t next to rows of size 1).
inline Matrix equilibrate(Matrix m) {
  for (int i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).cwiseAbs().maxCoeff();
    if (s > 0.0) m.row(i) /= s;
  }
  for (int j = 0; j < m.cols(); ++j) {
    const double s = m.col(j).cwiseAbs().maxCoeff();
    if (s > 0.0) m.col(j) /= s;
  }
  return m;
}

struct ClosureReport {
  std::set<MinorIndex> vanishing;          // deduced, includes the input set
  bool complete = false;                   // every minor deduced
  std::vector<std::string> failed_blocks;  // rank-deficient blocks met while closing
};

inline std::string describe_block(const char* kind, int fixed, int a, int b) {
  return std::string(kind) + " " + std::to_string(fixed + 1) + " minus {" + std::to_string(a + 1) + "," +
         std::to_string(b + 1) + "}";
}

inline ClosureReport close_minors(const Matrix& p, const std::vector<MinorIndex>& known, double tol = 1e-8) {
  const int n = static_cast<int>(p.rows());
  const Matrix m = equilibrate(p);
  ClosureReport rep;
  rep.vanishing.insert(known.begin(), known.end());
  std::set<std::string> failed;

  auto others = [n](int x, int y) {
    std::vector<int> v;
    for (int q = 0; q < n; ++q)
      if (q != x && q != y) v.push_back(q);
    return v;
  };
  auto all_but = [n](int x) {
    std::vector<int> v;
    for (int q = 0; q < n; ++q)
      if (q != x) v.push_back(q);
    return v;
  };

  for (bool grew = true; grew;) {
    grew = false;
    for (int r = 0; r < n; ++r) {  // row rule
      std::vector<int> cols;
      for (int s = 0; s < n; ++s)
        if (rep.vanishing.count({r, s})) cols.push_back(s);
      if (cols.size() < 2 || static_cast<int>(cols.size()) == n) continue;
      bool done = false;
      for (std::size_t a = 0; a < cols.size() && !done; ++a)
        for (std::size_t b = a + 1; b < cols.size() && !done; ++b) {
          if (block_full_rank(m, all_but(r), others(cols[a], cols[b]), tol)) {
            for (int s = 0; s < n; ++s) rep.vanishing.insert({r, s});
            done = grew = true;
          } else {
            failed.insert(describe_block("row", r, cols[a], cols[b]));
          }
        }
    }
    for (int s = 0; s < n; ++s) {  // column rule
      std::vector<int> rows;
      for (int r = 0; r < n; ++r)
        if (rep.vanishing.count({r, s})) rows.push_back(r);
      if (rows.size() < 2 || static_cast<int>(rows.size()) == n) continue;
      bool done = false;
      for (std::size_t a = 0; a < rows.size() && !done; ++a)
        for (std::size_t b = a + 1; b < rows.size() && !done; ++b) {
          if (block_full_rank(m, others(rows[a], rows[b]), all_but(s), tol)) {
            for (int r = 0; r < n; ++r) rep.vanishing.insert({r, s});
            done = grew = true;
          } else {
            failed.insert(describe_block("col", s, rows[a], rows[b]));
          }
        }
    }
  }
  rep.complete = static_cast<int>(rep.vanishing.size()) == n * n;
  rep.failed_blocks.assign(failed.begin(), failed.end());
  return rep;
}

// ---------------------------------------------------------------------------
// The two lemmas as standalone checks

/// Dependence of v_1..v_{m+1} in R^m (columns of `v`): returns true when the
/// hypotheses hold (v_1..v_{m-1} independent, {v_1..v_m} and
/// {v_1..v_{m-1}, v_{m+1}} dependent). `all_dependent` reports the conclusion.
struct DependenceCheck {
  bool hypotheses = false;
  bool all_dependent = false;
};

inline DependenceCheck check_dependence(const Matrix& v, double tol = 1e-8) {
  const int m = static_cast<int>(v.rows());
  if (v.cols() != m + 1) throw Error(ErrorCode::DimensionMismatch, "need m+1 vectors in R^m");
  auto independent = [&](const std::vector<int>& cols) {
    std::vector<int> rows(m);
    for (int k = 0; k < m; ++k) rows[k] = k;
    return block_full_rank(v, rows, cols, tol);
  };
  std::vector<int> base(m - 1);
  for (int k = 0; k < m - 1; ++k) base[k] = k;
  auto with = [&](int extra) {
    auto s = base;
    s.push_back(extra);
    return s;
  };
  DependenceCheck out;
  out.hypotheses = independent(base) && !independent(with(m - 1)) && !independent(with(m));
  out.all_dependent = true;
  for (int drop = 0; drop <= m; ++drop) {
    std::vector<int> s;
    for (int k = 0; k <= m; ++k)
      if (k != drop) s.push_back(k);
    if (independent(s)) out.all_dependent = false;
  }
  return out;
}

struct FourMinorCheck {
  bool hypotheses = false;                 // all (n-1)x(n-2) and (n-2)x(n-1) blocks full rank
  std::vector<std::string> failed_blocks;  // those that are not
  bool four_vanish = false;
  bool all_vanish = false;
  double max_minor = 0.0;                  // relative to the equilibrated matrix
};

/// Exhaustive form of the four-minor criterion for the leading 2x2 corner:
/// minors (0,0), (1,1), (0,1), (1,0).
inline FourMinorCheck check_four_minors(const Matrix& p, double tol = 1e-8) {
  const int n = static_cast<int>(p.rows());
  const Matrix m = equilibrate(p);
  FourMinorCheck out;
  std::vector<int> full(n);
  for (int k = 0; k < n; ++k) full[k] = k;
  auto drop = [&](std::vector<int> v, std::initializer_list<int> gone) {
    for (int g : gone) v.erase(std::remove(v.begin(), v.end(), g), v.end());
    return v;
  };
  for (int r = 0; r < n; ++r)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (!block_full_rank(m, drop(full, {r}), drop(full, {a, b}), tol))
          out.failed_blocks.push_back(describe_block("row", r, a, b));
        if (!block_full_rank(m, drop(full, {a, b}), drop(full, {r}), tol))
          out.failed_blocks.push_back(describe_block("col", r, a, b));
      }
  out.hypotheses = out.failed_blocks.empty();
  auto vanish = [&](int r, int c) { return std::abs(minor_det(m, r, c)) <= tol; };
  out.four_vanish = vanish(0, 0) && vanish(1, 1) && vanish(0, 1) && vanish(1, 0);
  out.max_minor = max_minor(m);
  out.all_vanish = out.max_minor <= tol;
  return out;
}

}  // namespace charvar
