#pragma once

// Sparse multivariate polynomials with real coefficients, exact
// differentiation and products. Used for embedding jets, where every
// derivative must be exact.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "charvar/error.hpp"

namespace charvar {

class Polynomial {
 public:
  using Exponent = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int vars) : vars_(vars) {}

  static Polynomial constant(int vars, double v) {
    Polynomial p(vars);
    p.add_term(Exponent(vars, 0), v);
    return p;
  }
  static Polynomial variable(int vars, int k) {
    Polynomial p(vars);
    Exponent e(vars, 0);
    e[k] = 1;
    p.add_term(e, 1.0);
    return p;
  }

  int vars() const { return vars_; }
  const std::map<Exponent, double>& terms() const { return terms_; }

  void add_term(const Exponent& e, double coeff) {
    if (static_cast<int>(e.size()) != vars_) throw Error(ErrorCode::DimensionMismatch, "exponent length");
    if (coeff == 0.0) return;
    terms_[e] += coeff;
  }

  double coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  int degree() const {
    int d = -1;
    for (const auto& [e, v] : terms_) {
      int s = 0;
      for (int k : e) s += k;
      d = std::max(d, s);
    }
    return d;
  }

  Polynomial derivative(int k) const {
    Polynomial out(vars_);
    for (const auto& [e, v] : terms_) {
      if (e[k] == 0) continue;
      Exponent f = e;
      --f[k];
      out.add_term(f, v * e[k]);
    }
    return out;
  }

  double operator()(const std::vector<double>& x) const {
    double sum = 0.0;
    for (const auto& [e, v] : terms_) {
      double m = v;
      for (int k = 0; k < vars_; ++k)
        for (int p = 0; p < e[k]; ++p) m *= x[k];
      sum += m;
    }
    return sum;
  }

  /// Largest |coefficient| among terms of total degree <= d.
  double max_coeff_up_to(int d) const {
    double m = 0.0;
    for (const auto& [e, v] : terms_) {
      int s = 0;
      for (int k : e) s += k;
      if (s <= d) m = std::max(m, std::abs(v));
    }
    return m;
  }

  /// Largest |partial derivative at 0| of order <= d: coefficient times the
  /// product of factorials of the exponent.
  double max_derivative_at_zero(int d) const {
    double m = 0.0;
    for (const auto& [e, v] : terms_) {
      int s = 0;
      double fact = 1.0;
      for (int k : e) {
        s += k;
        for (int q = 2; q <= k; ++q) fact *= q;
      }
      if (s <= d) m = std::max(m, std::abs(v) * fact);
    }
    return m;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [e, v] : o.terms_) terms_[e] += v;
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [e, v] : o.terms_) terms_[e] -= v;
    return *this;
  }
  Polynomial& operator*=(double s) {
    for (auto& [e, v] : terms_) v *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.vars_);
    for (const auto& [ea, va] : a.terms_)
      for (const auto& [eb, vb] : b.terms_) {
        Exponent e(a.vars_);
        for (int k = 0; k < a.vars_; ++k) e[k] = ea[k] + eb[k];
        out.terms_[e] += va * vb;
      }
    return out;
  }

 private:
  void check(const Polynomial& o) const {
    if (o.vars_ != vars_) throw Error(ErrorCode::DimensionMismatch, "polynomials in different variables");
  }

  int vars_ = 0;
  std::map<Exponent, double> terms_;
};

}  // namespace charvar
