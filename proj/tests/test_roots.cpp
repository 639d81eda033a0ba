#include <gtest/gtest.h>

#include <random>

#include "charvar/roots.hpp"
#include "support.hpp"

using namespace charvar;

TEST(Roots, KnownCubic) {
  // (s - 1)(s + 2)(s - 3) = s^3 - 2 s^2 - 5 s + 6
  const auto rr = real_roots({6.0, -5.0, -2.0, 1.0});
  ASSERT_EQ(rr.roots.size(), 3u);
  EXPECT_NEAR(rr.roots[0], -2.0, 1e-12);
  EXPECT_NEAR(rr.roots[1], 1.0, 1e-12);
  EXPECT_NEAR(rr.roots[2], 3.0, 1e-12);
  EXPECT_FALSE(rr.near_multiple);
}

TEST(Roots, ComplexPairIsDropped) {
  // (s - 2)(s^2 + 1)
  const auto rr = real_roots({-2.0, 1.0, -2.0, 1.0});
  ASSERT_EQ(rr.roots.size(), 1u);
  EXPECT_NEAR(rr.roots[0], 2.0, 1e-12);
}

TEST(Roots, DoubleRootIsFlagged) {
  // (s - 1)^2 (s + 1)
  EXPECT_TRUE(real_roots({1.0, -1.0, -1.0, 1.0}).near_multiple);
}

TEST(Roots, LeadingCoefficientTrimmed) {
  const auto rr = real_roots({-1.0, 1.0, 0.0, 1e-20});
  EXPECT_EQ(rr.degree, 1);
  ASSERT_EQ(rr.roots.size(), 1u);
  EXPECT_NEAR(rr.roots[0], 1.0, 1e-15);
}

TEST(Roots, CountAgreesWithSturm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    const int deg = 2 + rep % 4;
    Poly p(deg + 1);
    for (double& v : p) v = u(rng);
    const auto rr = real_roots(p);
    if (rr.near_multiple) continue;
    EXPECT_EQ(static_cast<int>(rr.roots.size()), oracle::sturm_count(p, -1e6, 1e6)) << rep;
    for (double s : rr.roots) EXPECT_LE(std::abs(poly_eval(p, s)), 1e-10 * std::max(1.0, std::pow(std::abs(s), deg)));
  }
}

TEST(Roots, PolynomialArithmetic) {
  const Poly a{1.0, 2.0}, b{-1.0, 0.0, 3.0};
  const Poly prod = poly_mul(a, b);
  for (double s : {-1.5, 0.0, 0.7, 2.0}) EXPECT_NEAR(poly_eval(prod, s), poly_eval(a, s) * poly_eval(b, s), 1e-14);
  const Poly d = poly_derivative(b);
  EXPECT_NEAR(poly_eval(d, 2.0), 12.0, 1e-15);
  EXPECT_NEAR(poly_eval(poly_sub(a, b), 1.0), 3.0 - 2.0, 1e-15);
}
