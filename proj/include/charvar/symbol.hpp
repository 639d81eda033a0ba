#pragma once

// Principal symbol P(xi, c) = sum_k xi_k A^k with (A^k)_ij = c_i^{kj}, and
// the dense linear algebra around it: determinants, (n-1)x(n-1) minors,
// SVD rank certificates and the gradient of xi -> det P.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "charvar/error.hpp"
#include "charvar/params.hpp"

namespace charvar {

using Covector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class SymbolMatrix {
 public:
  SymbolMatrix(Matrix entries, Covector xi) : p_(std::move(entries)), xi_(std::move(xi)) {}

  int n() const { return static_cast<int>(p_.rows()); }
  const Matrix& entries() const { return p_; }
  const Covector& xi() const { return xi_; }
  double operator()(int i, int j) const { return p_(i, j); }

 private:
  Matrix p_;
  Covector xi_;
};

/// Constant coefficient matrix A^k, (A^k)_ij = c_i^{kj}.
inline Matrix coefficient_matrix(const ParamSet& c, int k) {
  const int n = c.n();
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = c(i, k, j);
  return a;
}

inline SymbolMatrix assemble(const ParamSet& c, const Covector& xi) {
  const int n = c.n();
  if (xi.size() != n) throw Error(ErrorCode::DimensionMismatch, "covector length differs from n");
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += c(i, k, j) * xi(k);
      p(i, j) = s;
    }
  return SymbolMatrix(std::move(p), xi);
}

/// b_ij = sum_{k != j} c_i^{kj} xi_k, diagonal included. For the scaled
/// parameters t c the symbol is diag(xi) + t * b.
inline Matrix b_matrix(const ParamSet& c, const Covector& xi) {
  const int n = c.n();
  if (xi.size() != n) throw Error(ErrorCode::DimensionMismatch, "covector length differs from n");
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != j) s += c(i, k, j) * xi(k);
      b(i, j) = s;
    }
  return b;
}

inline double det(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  return m.partialPivLu().determinant();
}
inline double det(const SymbolMatrix& p) { return det(p.entries()); }

/// Submatrix with row `row` and column `col` removed.
inline Matrix delete_row_col(const Matrix& m, int row, int col) {
  const int r = static_cast<int>(m.rows()), c = static_cast<int>(m.cols());
  if (row < 0 || row >= r || col < 0 || col >= c)
    throw Error(ErrorCode::IndexOutOfRange, "minor index out of range");
  Matrix out(r - 1, c - 1);
  for (int i = 0, oi = 0; i < r; ++i) {
    if (i == row) continue;
    for (int j = 0, oj = 0; j < c; ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

/// det of P with row `row` and column `col` deleted. Always (row, col) order.
inline double minor_det(const Matrix& m, int row, int col) { return det(delete_row_col(m, row, col)); }
inline double minor_det(const SymbolMatrix& p, int row, int col) {
  return minor_det(p.entries(), row, col);
}

/// Largest |det| over all (n-1)x(n-1) minors.
inline double max_minor(const Matrix& m) {
  double best = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(minor_det(m, i, j)));
  return best;
}

/// Classical adjugate via cofactors. Stays well defined on singular input,
/// which is exactly where it is needed.
inline Matrix adjugate(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Matrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) adj(j, i) = ((i + j) % 2 ? -1.0 : 1.0) * minor_det(m, i, j);
  return adj;
}

struct RankCertificate {
  int rank = 0;
  Eigen::VectorXd singular_values;  // descending
  double tolerance = 0.0;
};

inline RankCertificate rank(const Matrix& m, double tol = 1e-8) {
  if (!(tol > 0.0)) throw Error(ErrorCode::Usage, "rank tolerance must be positive");
  Eigen::JacobiSVD<Matrix> svd(m);
  RankCertificate cert;
  cert.singular_values = svd.singularValues();
  cert.tolerance = tol;
  for (int k = 0; k < cert.singular_values.size(); ++k)
    if (!std::isfinite(cert.singular_values(k)))
      throw Error(ErrorCode::NumericalFailure, "SVD produced non-finite singular values");
  const double top = cert.singular_values.size() ? cert.singular_values(0) : 0.0;
  if (top > 0.0)
    for (int k = 0; k < cert.singular_values.size(); ++k)
      if (cert.singular_values(k) > tol * top) ++cert.rank;
  return cert;
}
inline RankCertificate rank(const SymbolMatrix& p, double tol = 1e-8) { return rank(p.entries(), tol); }

/// Gradient of xi -> det P(xi, c): d_k det = tr(adj(P) A^k).
inline Covector grad_det(const ParamSet& c, const Covector& xi) {
  const int n = c.n();
  const Matrix adj = adjugate(assemble(c, xi).entries());
  Covector g(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += adj(j, i) * c(i, k, j);
    g(k) = s;
  }
  return g;
}

}  // namespace charvar
