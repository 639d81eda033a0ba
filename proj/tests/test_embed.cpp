#include <gtest/gtest.h>

#include "charvar/embed.hpp"

using namespace charvar;

TEST(Tau, LiteralEnumeration) {
  const int n = 5;
  int expect = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) EXPECT_EQ(tau(i, j, n), expect++);
  EXPECT_THROW(tau(2, 2, n), Error);
  EXPECT_THROW(tau(0, 2, n), Error);
  EXPECT_EQ(pair_slot(3, 1, n), pair_slot(1, 3, n));
}

TEST(Counts, Identity) {
  for (int n = 3; n <= 9; ++n) {
    const auto k = embedding_counts(n);
    EXPECT_EQ(k.A, 1LL * (n * (n + 1) / 2) * (n * (n + 1) / 2));
    EXPECT_EQ(k.B, 1LL * n * n * (n + 1) * (n + 2) / 6);
    EXPECT_EQ(k.B - (k.A - k.C), 1LL * n * (n - 1) * (n - 2) * (n - 3) / 24) << n;
  }
  EXPECT_EQ(embedding_counts(3).B - (embedding_counts(3).A - embedding_counts(3).C), 0);
}

TEST(Curvature, GaussTensorSymmetries) {
  for (int n = 3; n <= 5; ++n) {
    const auto R = gauss_curvature(h_from_params(sample(n, n)));
    EXPECT_LE(R.invariant_residual(), 1e-13);
    EXPECT_GT(R.max_abs(), 0.0);
  }
}

TEST(Curvature, MetricReproducesCurvature) {
  const auto R = gauss_curvature(h_from_params(sample(4, 2)));
  const auto back = curvature_at_origin(metric_from_curvature(R));
  for (std::size_t k = 0; k < R.r.size(); ++k) EXPECT_NEAR(back.r[k], R.r[k], 1e-13);
}

TEST(Curvature, RejectsBrokenTensor) {
  CurvatureTensor R(3);
  R.at(0, 1, 0, 1) = 1.0;  // antisymmetry partner left at zero
  EXPECT_THROW(metric_from_curvature(R), Error);
}

TEST(SecondForm, PairBasisAndDiagonal) {
  const ParamSet c = sample(4, 6);
  const auto h = h_from_params(c);
  EXPECT_LE((h.pair_matrix() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 0.0);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) EXPECT_EQ(h(k, k)(pair_slot(i, j, 4)), -2.0 * c(k, i, j));
}

TEST(Embed, PipelineResiduals) {
  for (int n = 3; n <= 5; ++n)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const ParamSet c = sample(n, seed);
      const auto sol = embed_from_params(c);
      const auto g = metric_from_curvature(gauss_curvature(h_from_params(c)));
      EXPECT_LE(sol.gauss_residual, 1e-12);
      EXPECT_LE(sol.max_equation_residual, 1e-9);
      EXPECT_LE(verify_order2(sol.jet, g).max_derivative, 1e-10);
      EXPECT_EQ(sol.counts.B, embedding_counts(n).B);
    }
}

// The jet must reproduce g through second order; perturbing one cubic
// coefficient has to break that.
TEST(Embed, PerturbedJetFailsOrderTwo) {
  const ParamSet c = sample(4, 1);
  auto sol = embed_from_params(c);
  const auto g = metric_from_curvature(gauss_curvature(h_from_params(c)));
  sol.jet.alpha[sol.jet.unknown(0, 0, 1, 2)] += 1e-3;
  EXPECT_GT(verify_order2(sol.jet, g).max_derivative, 1e-4);
}

TEST(Embed, EquationResidualOracle) {
  // d_kl g_ij = h_ik.h_lj + h_il.h_jk + alpha^j_ikl + alpha^i_jkl, written out.
  const ParamSet c = sample(4, 9);
  const auto sol = embed_from_params(c);
  const auto& jet = sol.jet;
  const auto g = metric_from_curvature(gauss_curvature(jet.h));
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          const double rhs = jet.h(i, k).dot(jet.h(l, j)) + jet.h(i, l).dot(jet.h(j, k)) + jet.a(j, i, k, l) +
                             jet.a(i, j, k, l);
          worst = std::max(worst, std::abs(g.second(i, j, k, l) - rhs));
        }
  EXPECT_LE(worst, 1e-12);
}
