#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slk/affinity.hpp"
#include "slk/error.hpp"

using namespace slk;

namespace {

FeatureMatrix line(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return FeatureMatrix(n, 1, std::move(xs));
}

}  // namespace

TEST(Knn, PointsOnALine) {
  const NeighborLists nl = knn_search(line({0.0, 1.0, 10.0}), 1);
  EXPECT_EQ(nl.of(0)[0], 1u);
  EXPECT_EQ(nl.of(1)[0], 0u);
  EXPECT_EQ(nl.of(2)[0], 1u);
  EXPECT_EQ(nl.dist2_of(2)[0], 81.0);
}

TEST(Knn, DuplicatesWinAndTiesGoToLowerIndex) {
  // Point 0 and 2 coincide; point 1 is farther from both.
  const NeighborLists nl = knn_search(line({5.0, 0.0, 5.0}), 1);
  EXPECT_EQ(nl.of(0)[0], 2u);
  EXPECT_EQ(nl.of(2)[0], 0u);
  // Point 1 is equidistant from 0 and 2.
  EXPECT_EQ(nl.of(1)[0], 0u);
  const NeighborLists tie = knn_search(line({0.0, -1.0, 1.0}), 1);
  EXPECT_EQ(tie.of(0)[0], 1u);
}

TEST(Knn, MatchesBruteForceSort) {
  std::mt19937_64 rng(11);
  const FeatureMatrix x = oracle::random_features(20, 3, rng);
  const auto expected = oracle::brute_knn(oracle::to_eigen(x), 4);
  const NeighborLists nl = knn_search(x, 4);
  for (std::size_t p = 0; p < 20; ++p)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(nl.of(p)[j], expected[p][j].second);
      EXPECT_NEAR(nl.dist2_of(p)[j], expected[p][j].first, 1e-12);
    }
  const SparseAffinity g = knn_graph(nl);
  EXPECT_EQ(g.nnz(), 20u * 4u);
  EXPECT_FALSE(g.symmetric());
  for (std::size_t p = 0; p < 20; ++p)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(g.weight(p, expected[p][j].second), 1.0);
}

TEST(Knn, RhoMustLeaveRoom) {
  const FeatureMatrix x = line({0.0, 1.0, 2.0});
  EXPECT_THROW(knn_search(x, 0), Error);
  EXPECT_THROW(knn_search(x, 3), Error);
  EXPECT_NO_THROW(knn_search(x, 2));
}

TEST(Symmetrize, SingleDirectedEdge) {
  const SparseAffinity g = SparseAffinity::from_triplets(2, {{0, 1, 1.0}}, false);
  const SparseAffinity s = symmetrize(g, SymmetrizeMode::Max);
  EXPECT_TRUE(s.symmetric());
  EXPECT_EQ(s.weight(0, 1), 1.0);
  EXPECT_EQ(s.weight(1, 0), 1.0);
  const SparseAffinity m = symmetrize(g, SymmetrizeMode::Mean);
  EXPECT_EQ(m.weight(0, 1), 0.5);
  EXPECT_EQ(m.weight(1, 0), 0.5);
}

TEST(Symmetrize, SymmetricInputUnchanged) {
  std::mt19937_64 rng(3);
  const SparseAffinity g = oracle::random_symmetric_graph(12, 0.3, rng);
  for (auto mode : {SymmetrizeMode::Max, SymmetrizeMode::Mean, SymmetrizeMode::None}) {
    const SparseAffinity s = symmetrize(g, mode);
    EXPECT_EQ(oracle::dense_weights(s), oracle::dense_weights(g)) << to_string(mode);
  }
}

TEST(Symmetrize, MeanAndMaxMatchDenseOracle) {
  std::mt19937_64 rng(4);
  const SparseAffinity g = oracle::random_directed_graph(15, 0.25, rng);
  const Eigen::MatrixXd w = oracle::dense_weights(g);
  const Eigen::MatrixXd mean = oracle::dense_weights(symmetrize(g, SymmetrizeMode::Mean));
  const Eigen::MatrixXd max = oracle::dense_weights(symmetrize(g, SymmetrizeMode::Max));
  for (int p = 0; p < 15; ++p)
    for (int q = 0; q < 15; ++q) {
      EXPECT_DOUBLE_EQ(mean(p, q), 0.5 * (w(p, q) + w(q, p)));
      EXPECT_DOUBLE_EQ(max(p, q), std::max(w(p, q), w(q, p)));
    }
  const SparseAffinity none = symmetrize(g, SymmetrizeMode::None);
  EXPECT_EQ(oracle::dense_weights(none), w);
}

TEST(Symmetrize, ModeNamesRoundTrip) {
  for (auto mode : {SymmetrizeMode::Max, SymmetrizeMode::Mean, SymmetrizeMode::None})
    EXPECT_EQ(parse_symmetrize_mode(to_string(mode)), mode);
  EXPECT_THROW(parse_symmetrize_mode("min"), Error);
}

TEST(SparseAffinity, RejectsInvalidGraphs) {
  EXPECT_THROW(SparseAffinity::from_triplets(2, {{0, 0, 1.0}}, false), Error);
  EXPECT_THROW(SparseAffinity::from_triplets(2, {{0, 1, -1.0}}, false), Error);
  EXPECT_THROW(SparseAffinity::from_triplets(2, {{0, 1, 1.0}}, true), Error);
  EXPECT_THROW(SparseAffinity::from_triplets(2, {{0, 1, 1.0}, {0, 1, 2.0}}, false), Error);
  EXPECT_THROW(SparseAffinity::from_triplets(2, {{0, 2, 1.0}}, false), Error);
  EXPECT_THROW(SparseAffinity::empty(2).with_diag_shift(-1.0), Error);
}

TEST(SparseAffinity, DegreesAreRowSums) {
  const SparseAffinity g = SparseAffinity::from_triplets(3, {{0, 1, 0.5}, {0, 2, 2.0}, {2, 1, 1.0}}, false);
  EXPECT_EQ(g.degrees()[0], 2.5);
  EXPECT_EQ(g.degrees()[1], 0.0);
  EXPECT_EQ(g.degrees()[2], 1.0);
  EXPECT_EQ(g.total_degree(), 3.5);
  EXPECT_EQ(format_graph_triplets(g), "0 1 0.5\n0 2 2\n2 1 1\n");
}

TEST(Sigma2, TwoPointsByHand) {
  EXPECT_DOUBLE_EQ(estimate_sigma2(line({0.0, 2.0}), 1).sigma2, 4.0);
}

TEST(Sigma2, IdenticalPointsAreDegenerate) {
  try {
    estimate_sigma2(line({3.0, 3.0, 3.0}), 1);
    FAIL() << "expected DegenerateData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateData);
  }
}

TEST(Sigma2, MatchesDoubleLoop) {
  std::mt19937_64 rng(5);
  const FeatureMatrix x = oracle::random_features(15, 2, rng);
  const auto nn = oracle::brute_knn(oracle::to_eigen(x), 3);
  double total = 0.0;
  for (const auto& row : nn)
    for (const auto& [d2, q] : row) total += d2;
  EXPECT_NEAR(estimate_sigma2(x, 3).sigma2, total / (15.0 * 3.0), 1e-12);
}

TEST(LaplacianQuadratic, ConstantRowsGiveZero) {
  std::mt19937_64 rng(6);
  const SparseAffinity g = oracle::random_symmetric_graph(10, 0.4, rng);
  Matrix s(10, 3);
  for (std::size_t p = 0; p < 10; ++p) {
    s(p, 0) = 0.2;
    s(p, 1) = 0.3;
    s(p, 2) = 0.5;
  }
  EXPECT_EQ(laplacian_quadratic(g, s), 0.0);
}

TEST(LaplacianQuadratic, SingleEdgeByHand) {
  const SoftAssignment s = SoftAssignment::one_hot(std::vector<int>{0, 1}, 2);
  EXPECT_EQ(laplacian_quadratic(SparseAffinity::from_triplets(2, {{0, 1, 1.0}}, false), s), 2.0);
  EXPECT_EQ(laplacian_quadratic(SparseAffinity::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}}, true), s), 4.0);
}

TEST(LaplacianQuadratic, MatchesDenseLaplacian) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseAffinity g = trial % 2 ? oracle::random_directed_graph(25, 0.2, rng)
                                       : oracle::random_symmetric_graph(25, 0.2, rng);
    const SoftAssignment s = oracle::random_simplex(25, 4, rng);
    const double expected = oracle::laplacian_trace(oracle::dense_weights(g), oracle::to_eigen(s));
    const double got = laplacian_quadratic(g, s);
    EXPECT_NEAR(got, expected, 1e-10 * std::max(1.0, std::abs(expected)));
    EXPECT_EQ(laplacian_quadratic(g.with_diag_shift(3.0), s), got);
  }
}

TEST(Gershgorin, ShiftMakesGraphPsd) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseAffinity g = oracle::random_symmetric_graph(20, 0.3, rng);
    const double shift = gershgorin_shift(g);
    const Eigen::MatrixXd w = oracle::dense_weights(g) + shift * Eigen::MatrixXd::Identity(20, 20);
    EXPECT_GE(oracle::min_eigenvalue(w), -1e-12);
  }
}
