#include <gtest/gtest.h>

#include "charvar/singular.hpp"
#include "support.hpp"

using namespace charvar;

namespace {
// Every certified point, checked from scratch: SVD rank and cofactor minors
// of P(xi, t c) at the reported unit xi.
void expect_certified(const ParamSet& c, const SingularPoint& p) {
  const Matrix m = oracle::literal_symbol(scale(c, p.t), c.n(), p.xi);
  const auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  EXPECT_LE(sv(c.n() - 2), 1e-8 * sv(0));
  double worst = 0.0;
  for (int r = 0; r < c.n(); ++r)
    for (int s = 0; s < c.n(); ++s) worst = std::max(worst, std::abs(oracle::cofactor_det(delete_row_col(m, r, s))));
  EXPECT_LE(worst, 1e-8);
  EXPECT_NEAR(p.xi.norm(), 1.0, 1e-12);
}
}  // namespace

TEST(Count, MatchesPredictionAtSmallScale) {
  for (std::uint64_t seed : {2, 4, 11, 15}) {
    const ParamSet c = sample(5, seed);
    ASSERT_TRUE(check_all_pairs(c).passed);
    const auto pred = predict_count(c);
    const auto det = count_detected(c, 1e-5);
    EXPECT_EQ(det.count, pred.total) << "seed " << seed;
    for (const auto& p : det.points) expect_certified(c, p);
  }
}

TEST(Count, CliExampleSeed) {
  const ParamSet c = sample(5, 11);
  const auto det = count_detected(c, 1e-3);
  EXPECT_EQ(det.count, predict_count(c).total);
  EXPECT_TRUE(det.failures.empty());
}

TEST(Count, PointsAreDistinct) {
  const ParamSet c = sample(5, 2);
  const auto det = count_detected(c, 1e-3);
  for (std::size_t a = 0; a < det.points.size(); ++a)
    for (std::size_t b = a + 1; b < det.points.size(); ++b)
      EXPECT_GT(projective_distance(det.points[a].xi, det.points[b].xi), 1e-9);
}

TEST(Count, IndependentOfThreadCount) {
  const ParamSet c = sample(5, 3);
  const auto a = count_detected(c, 1e-3, {}, 1), b = count_detected(c, 1e-3, {}, 3);
  ASSERT_EQ(a.count, b.count);
  for (std::size_t k = 0; k < a.points.size(); ++k) EXPECT_EQ(a.points[k].xi, b.points[k].xi);
}

TEST(Refine, DriftIsLinearInT) {
  const ParamSet c = sample(5, 2);
  std::vector<double> ts{1e-3, 1e-4, 1e-5}, drift;
  for (double t : ts) {
    double d = 0.0;
    for (const auto& p : count_detected(c, t).points) d = std::max(d, p.seed_distance);
    drift.push_back(d);
  }
  EXPECT_NEAR(loglog_slope(ts, drift), 1.0, 0.2);
}

TEST(Refine, EachCaseConverges) {
  const ParamSet c = sample(5, 11);
  const auto c1 = case1_points(c), c2 = case2_points(c), c3 = case3_points(c);
  expect_certified(c, refine(c, 1e-4, c1.points.front()));
  expect_certified(c, refine(c, 1e-4, c2.points.front()));
  const auto& q = c3.points.front();
  for (int r = 0; r < static_cast<int>(q.zbar.size()); ++r) expect_certified(c, refine(c, 1e-4, q, r));
}

TEST(Refine, RejectsNonGenericPair) {
  ParamSet c = sample(5, 12);
  c.set(0, 2, 1, c(1, 2, 0) * c(0, 3, 1) / c(1, 3, 0));  // cond1 for (0, 1)
  LimitPoint lp;
  lp.zeros = {0, 1};
  lp.coords = Covector::Ones(5);
  lp.case_id = 1;
  try {
    refine(c, 1e-3, lp);
    FAIL() << "expected a genericity error";
  } catch (const Error& e) {
    EXPECT_TRUE(is_degeneracy(e.code()));
  }
  EXPECT_THROW(refine(c, -1.0, lp), Error);
}

TEST(Refine, SameSingularPointIsSymmetric) {
  const ParamSet c = sample(5, 2);
  const auto det = count_detected(c, 1e-3);
  const auto& a = det.points[0];
  SingularPoint flipped = a;
  flipped.xi = -a.xi;
  flipped.y = -a.y;
  EXPECT_TRUE(same_singular_point(a, flipped));
  EXPECT_FALSE(same_singular_point(a, det.points[1]));
}

TEST(Surface, SixDimensionalTrace) {
  const ParamSet c = sample(6, 1);
  const auto tr = surface_trace(c, 1e-3, 0, 1);
  EXPECT_GE(tr.converged(), 48);
  EXPECT_LT(max_consecutive_gap(tr), 3.0 * tr.spacing);
  for (const auto& nd : tr.nodes)
    if (nd.point) {
      EXPECT_LE(nd.point->rank_cert.rank, 4);
      EXPECT_LE(nd.point->minor_residual, nd.point->minor_tolerance);
    }
}

TEST(Surface, RequiresGenericPair) {
  EXPECT_THROW(surface_trace(ParamSet(6), 1e-3, 0, 1), Error);
  EXPECT_THROW(surface_trace(sample(4, 1), 1e-3, 0, 1), Error);
}

TEST(Fit, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({1e-2, 1e-3, 1e-4}, {3e-2, 3e-3, 3e-4}), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope({1.0, 4.0}, {1.0, 2.0}), 0.5, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1.0}, {1.0})));
}
