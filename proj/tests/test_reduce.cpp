#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "charvar/reduce.hpp"
#include "support.hpp"

using namespace charvar;

TEST(Reduce, ClosureAtOrigin) {
  for (int n = 3; n <= 5; ++n)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const ParamSet c = sample(n, seed);
      const auto sol = embed_from_params(c);
      const auto fr = frame_at(sol.jet, std::vector<double>(n, 0.0));
      const auto rs = reduced_system(fr, Eigen::MatrixXd::Zero(n, n));
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) EXPECT_NEAR(rs.A[k](i, j), c(i, k, j), 1e-12);
      EXPECT_LE(rs.B.cwiseAbs().maxCoeff(), 1e-10);
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g;
      for (int s = 0; s < 100; ++s) {
        Eigen::VectorXd xi(n);
        for (int k = 0; k < n; ++k) xi(k) = g(rng);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) sum += xi(k) * rs.A[k];
        EXPECT_LE((sum - oracle::literal_symbol(c, n, xi)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
}

TEST(Reduce, FrameIsOrthonormalAndNormal) {
  const auto sol = embed_from_params(sample(4, 2));
  const auto fr = frame_at(sol.jet, {0.003, -0.002, 0.001, 0.004});
  const int codim = static_cast<int>(fr.normal.cols());
  EXPECT_LE((fr.normal.transpose() * fr.normal - Eigen::MatrixXd::Identity(codim, codim)).cwiseAbs().maxCoeff(),
            1e-13);
  EXPECT_LE((fr.normal.transpose() * fr.tangent).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((fr.p - fr.tangent.transpose() * fr.tangent).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Reduce, ManufacturedRoundTrip) {
  for (int n = 3; n <= 4; ++n)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto sol = embed_from_params(sample(n, seed));
      const RoundTrip rt = manufactured_round_trip(sol.jet, seed, 20, 1e-2);
      EXPECT_EQ(rt.points, 20);
      EXPECT_LE(rt.tangential, 1e-9);
      EXPECT_LE(rt.normal, 1e-9);
    }
}

// A wrong right-hand side must show up in the residual.
TEST(Reduce, RoundTripDetectsWrongData) {
  const int n = 3;
  const auto sol = embed_from_params(sample(n, 4));
  const auto fr = frame_at(sol.jet, {0.001, 0.002, -0.001});
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  f(0, 0) = 1.0;
  const auto rs = reduced_system(fr, f);
  const Eigen::VectorXd r = tangential_residual(rs, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n));
  EXPECT_GT(r.cwiseAbs().maxCoeff(), 0.1);
}

TEST(Reduce, SingularHRejected) {
  auto sol = embed_from_params(sample(3, 1));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sol.jet.h.at(i, j).setZero();
  // With h = 0 the normal frame still exists but H(0) vanishes.
  const auto fr = frame_at(sol.jet, {0.0, 0.0, 0.0});
  try {
    reduced_system(fr, Eigen::MatrixXd::Zero(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HNotInvertible);
  }
}

TEST(Reduce, ClosureCsv) {
  const ParamSet c = sample(3, 2);
  const auto sol = embed_from_params(c);
  const auto rs = reduced_system(frame_at(sol.jet, {0.0, 0.0, 0.0}), Eigen::MatrixXd::Zero(3, 3));
  std::ostringstream os;
  write_closure_csv(os, rs, c);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("k,i,j,A,c,diff\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 28);
}
