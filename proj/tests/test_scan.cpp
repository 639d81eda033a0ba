#include <gtest/gtest.h>

#include "charvar/scan.hpp"
#include "support.hpp"

using namespace charvar;

TEST(Smooth, GenericDrawHasNoSingularPoints) {
  const ParamSet c = sample(4, 3);
  ASSERT_TRUE(check_n4_conditions(c).passed);
  ScanOptions opt;
  opt.min_circles = 64;
  const auto rep = smooth_scan_n4(c, 1e-3, 2000, opt);
  EXPECT_TRUE(rep.coverage_ok);
  EXPECT_GE(rep.samples, 2000);
  EXPECT_FALSE(rep.singular_found);
  EXPECT_GE(rep.min_rank, 3);
  EXPECT_GT(rep.min_grad, 1e-4);
}

TEST(Smooth, SamplesLieOnTheVariety) {
  const ParamSet c = sample(4, 5), ct = scale(c, 1e-3);
  std::mt19937_64 rng(1);
  const Covector u = random_unit(4, rng);
  Covector w = random_unit(4, rng);
  w = (w - w.dot(u) * u).normalized();
  const CircleDet f{ct, u, w};
  double prev = f(0.0);
  int roots = 0;
  for (int s = 1; s <= 512; ++s) {
    const double th = M_PI * s / 512, cur = f(th);
    if ((cur < 0) != (prev < 0)) {
      const Covector xi = polish_on_sphere(ct, f.at(bisect(f, M_PI * (s - 1) / 512, th, prev)));
      EXPECT_LE(std::abs(oracle::cofactor_det(oracle::literal_symbol(ct, 4, xi))), 1e-14);
      ++roots;
    }
    prev = cur;
  }
  EXPECT_GT(roots, 0);
}

// det P(xi, t c) is about xi_i xi_j - t^2 K near a crossing, so the raw
// gradient is O(t) and the normalized one O(1).
TEST(Smooth, GradientNormalization) {
  Covector xi(4), g(4);
  xi << 1.0, 0.0, 0.0, 0.0;
  g << 0.0, 2e-3, 0.0, 0.0;
  EXPECT_NEAR(normalized_gradient(g, xi, 1e-3), 2.0, 1e-12);
  EXPECT_NEAR(normalized_gradient(g, 2.0 * xi, 1e-3), 0.25, 1e-12);
}

TEST(Smooth, WrongDimension) { EXPECT_THROW(smooth_scan_n4(sample(5, 1), 1e-3, 10), Error); }

TEST(Witness, RandomParameters) {
  for (int n = 3; n <= 6; ++n)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ParamSet c = sample(n, seed);
      const Witness w = nonempty_witness(c);
      EXPECT_LE(w.residual, 1e-10);
      const Covector u = w.xi.normalized();
      const Matrix p = oracle::literal_symbol(c, n, u);
      const double s1 = Eigen::JacobiSVD<Matrix>(p).singularValues()(0);
      EXPECT_LE(std::abs(oracle::cofactor_det(p)) / std::pow(s1, n), 1e-10) << n << " " << seed;
    }
}

TEST(Witness, CoordinateDirectionWhenAvailable) {
  // c = 0: P(xi) = diag(xi), singular on every coordinate hyperplane.
  const Witness w = nonempty_witness(ParamSet(4));
  EXPECT_EQ(w.method, "coordinate");
  EXPECT_EQ(w.residual, 0.0);
}
