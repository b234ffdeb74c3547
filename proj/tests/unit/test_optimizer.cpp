#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slk/error.hpp"
#include "slk/optimizer.hpp"

using namespace slk;

namespace {

SolverConfig config_with(double lambda, PrototypeRule rule = PrototypeRule::Means, double sigma2 = 1.0) {
  SolverConfig c;
  c.lambda = lambda;
  c.rule = rule;
  c.sigma2 = sigma2;
  return c;
}

Prototypes random_prototypes(std::size_t k, std::size_t d, std::mt19937_64& rng, PrototypeRule rule) {
  return Prototypes{oracle::random_features(k, d, rng).matrix(), rule};
}

SparseAffinity chain(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    t.push_back({p, p + 1, 1.0});
    t.push_back({p + 1, p, 1.0});
  }
  return SparseAffinity::from_triplets(n, std::move(t), true);
}

}  // namespace

TEST(NeighborVotes, NoEdgesGiveZero) {
  std::mt19937_64 rng(31);
  const Matrix b = neighbor_votes(SparseAffinity::empty(5), oracle::random_simplex(5, 3, rng));
  for (double v : b.values()) EXPECT_EQ(v, 0.0);
}

TEST(NeighborVotes, SingleEdgeSwapsRows) {
  const SparseAffinity g = SparseAffinity::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}}, true);
  const SoftAssignment s(Matrix(2, 2, std::vector<double>{0.3, 0.7, 0.9, 0.1}));
  const Matrix b = neighbor_votes(g, s);
  EXPECT_EQ(b(0, 0), 0.9);
  EXPECT_EQ(b(0, 1), 0.1);
  EXPECT_EQ(b(1, 0), 0.3);
  EXPECT_EQ(b(1, 1), 0.7);
}

TEST(NeighborVotes, MatchesDenseProduct) {
  std::mt19937_64 rng(32);
  const SparseAffinity g = oracle::random_directed_graph(30, 0.2, rng).with_diag_shift(0.7);
  const SoftAssignment s = oracle::random_simplex(30, 4, rng);
  const Eigen::MatrixXd expected =
      (oracle::dense_weights(g) + 0.7 * Eigen::MatrixXd::Identity(30, 30)) * oracle::to_eigen(s);
  const Matrix b = neighbor_votes(g, s);
  for (int p = 0; p < 30; ++p)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(b(p, k), expected(p, k), 1e-10);
}

TEST(InnerUpdate, ZeroInputsGiveUniform) {
  const std::vector<double> zero(3, 0.0);
  for (double v : s_inner_update(zero, zero, 0.7)) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(InnerUpdate, HandSoftmax) {
  const std::vector<double> a{std::log(3.0), 0.0}, b{5.0, -2.0};
  const auto s = s_inner_update(a, b, 0.0);
  EXPECT_DOUBLE_EQ(s[0], 0.75);
  EXPECT_DOUBLE_EQ(s[1], 0.25);
}

TEST(InnerUpdate, StableForHugeScores) {
  const std::vector<double> a{-1e6, -1e6 - 1.0}, b{0.0, 0.0};
  const auto s = s_inner_update(a, b, 1.0);
  EXPECT_NEAR(s[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(InnerUpdate, MinimizesRowBoundOnSimplexGrid) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(3), b(3);
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng);
    const double lambda = u(rng);
    std::vector<double> c(3);
    for (int k = 0; k < 3; ++k) c[k] = a[k] + lambda * b[k];
    // A 140-step triangular grid has 10,011 points.
    const auto grid = oracle::simplex_grid_argmin(c, 140);
    const auto s = s_inner_update(a, b, lambda);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(s[k], grid[k], 1.0 / 140.0);
  }
}

TEST(SBlock, LambdaZeroIsOneSweepOfSoftmax) {
  std::mt19937_64 rng(34);
  const FeatureMatrix x = oracle::random_features(10, 2, rng);
  const Prototypes m = random_prototypes(3, 2, rng, PrototypeRule::Means);
  const SparseAffinity g = oracle::random_symmetric_graph(10, 0.5, rng);
  const InnerResult r = s_block(g, x, m, SoftAssignment(10, 3), config_with(0.0));
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_TRUE(r.converged);
  const Matrix a = prototype_scores(x, m, 1.0);
  const std::vector<double> zeros(3, 0.0);
  for (std::size_t p = 0; p < 10; ++p) {
    const auto expected = s_inner_update(a.row(p), zeros, 0.0);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(r.assignment.row(p)[k], expected[k]);
  }
}

TEST(SBlock, AllClampedReturnsInput) {
  const FeatureMatrix x = FeatureMatrix::from_rows({{0.0}, {1.0}});
  SoftAssignment s(2, 2);
  s.clamp(0, 1);
  s.clamp(1, 0);
  const Prototypes m{Matrix(2, 1, std::vector<double>{0.0, 1.0}), PrototypeRule::Means};
  const InnerResult r = s_block(chain(2), x, m, s, config_with(1.0));
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.assignment.matrix(), s.matrix());
}

TEST(SBlock, ChainFixedPointSatisfiesUpdate) {
  std::mt19937_64 rng(35);
  const FeatureMatrix x = oracle::random_features(6, 2, rng);
  const Prototypes m = random_prototypes(2, 2, rng, PrototypeRule::Means);
  SolverConfig cfg = config_with(0.5);
  cfg.inner_tol = 1e-12;
  cfg.inner_max = 10000;
  const SparseAffinity g = chain(6);
  const InnerResult r = s_block(g, x, m, SoftAssignment(6, 2), cfg);
  ASSERT_TRUE(r.converged);
  const Matrix a = prototype_scores(x, m, 1.0);
  const Matrix b = neighbor_votes(g, r.assignment);
  for (std::size_t p = 0; p < 6; ++p) {
    const auto expected = s_inner_update(a.row(p), b.row(p), 0.5);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(r.assignment.row(p)[k], expected[k], 1e-6);
  }
}

TEST(RelaxedObjective, OneHotEqualsDiscrete) {
  std::mt19937_64 rng(36);
  const FeatureMatrix x = oracle::random_features(12, 3, rng);
  const SparseAffinity g = oracle::random_symmetric_graph(12, 0.3, rng, 0.4);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<int> labels(12);
  for (int& l : labels) l = label(rng);
  const SoftAssignment s = SoftAssignment::one_hot(labels, 3);
  for (auto rule : {PrototypeRule::Means, PrototypeRule::Modes}) {
    const Prototypes m = random_prototypes(3, 3, rng, rule);
    const SolverConfig cfg = config_with(1.7, rule, 2.0);
    EXPECT_NEAR(relaxed_objective(x, g, s, m, cfg), discrete_objective(x, g, s, m, cfg), 1e-10);
  }
}

TEST(RelaxedObjective, UniformWithoutEdgesIsEntropyBound) {
  const FeatureMatrix x = FeatureMatrix::from_rows({{0.0}, {0.0}, {0.0}, {0.0}});
  const Prototypes m{Matrix(3, 1, 0.0), PrototypeRule::Means};
  EXPECT_NEAR(relaxed_objective(x, SparseAffinity::empty(4), SoftAssignment(4, 3), m, config_with(2.0)),
              -4.0 * std::log(3.0), 1e-12);
}

TEST(RelaxedObjective, MatchesTermByTermOracle) {
  std::mt19937_64 rng(37);
  const FeatureMatrix x = oracle::random_features(20, 3, rng);
  const SparseAffinity g = oracle::random_symmetric_graph(20, 0.25, rng, 0.3);
  const SoftAssignment s = oracle::random_simplex(20, 4, rng);
  for (auto rule : {PrototypeRule::Means, PrototypeRule::Modes}) {
    const Prototypes m = random_prototypes(4, 3, rng, rule);
    const SolverConfig cfg = config_with(0.8, rule, 1.5);
    const double expected =
        oracle::relaxed_objective(oracle::scores(oracle::to_eigen(x), oracle::to_eigen(m.values),
                                                 rule == PrototypeRule::Modes, 1.5),
                                  oracle::dense_weights(g), 0.3, oracle::to_eigen(s), 0.8);
    EXPECT_NEAR(relaxed_objective(x, g, s, m, cfg), expected, 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST(DiscreteObjective, LambdaZeroIsKMeansSse) {
  std::mt19937_64 rng(38);
  const FeatureMatrix x = oracle::random_features(15, 2, rng);
  const Prototypes m = random_prototypes(3, 2, rng, PrototypeRule::Means);
  std::vector<int> labels(15);
  for (std::size_t p = 0; p < 15; ++p) labels[p] = static_cast<int>(p % 3);
  double sse = 0.0;
  for (std::size_t p = 0; p < 15; ++p) sse += squared_distance(x.row(p), m.row(labels[p]));
  EXPECT_NEAR(discrete_objective(x, SparseAffinity::empty(15), SoftAssignment::one_hot(labels, 3), m,
                                 config_with(0.0)),
              sse, 1e-12);
}

TEST(DiscreteObjective, PointsAtTheirPrototypesGiveZero) {
  const FeatureMatrix x = FeatureMatrix::from_rows({{1.0, 2.0}, {-3.0, 0.5}});
  const Prototypes m{x.matrix(), PrototypeRule::Means};
  EXPECT_EQ(discrete_objective(x, SparseAffinity::empty(2), SoftAssignment::one_hot(std::vector<int>{0, 1}, 2), m,
                               config_with(1.0)),
            0.0);
  EXPECT_THROW(discrete_objective(x, SparseAffinity::empty(2), SoftAssignment(2, 2), m, config_with(1.0)), Error);
}

TEST(DiscreteObjective, EnumerationIsAGlobalLowerBound) {
  std::mt19937_64 rng(39);
  for (int trial = 0; trial < 3; ++trial) {
    const FeatureMatrix x = oracle::random_features(8, 2, rng);
    const SparseAffinity raw = oracle::random_symmetric_graph(8, 0.4, rng);
    const SparseAffinity g = raw.with_diag_shift(oracle::psd_shift(raw));
    const SolverConfig cfg = config_with(1.0);
    const SolveResult r = solve(x, g, Prototypes{Matrix(2, 2, std::vector<double>{x.row(0)[0], x.row(0)[1], x.row(1)[0], x.row(1)[1]}), PrototypeRule::Means}, cfg);
    double global = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 256; ++mask) {
      std::vector<int> labels(8);
      for (int p = 0; p < 8; ++p) labels[p] = (mask >> p) & 1;
      global = std::min(global, oracle::labelling_energy_means(oracle::to_eigen(x), oracle::dense_weights(g), labels, 2, 1.0));
    }
    EXPECT_LE(global, r.report.discrete_objective + 1e-12);
    const auto& t = r.report.relaxed_trace;
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i], t[i - 1] + 1e-9 * (1.0 + std::abs(t[i - 1])));
  }
}

TEST(AuxiliaryValue, TightAtAnchor) {
  std::mt19937_64 rng(40);
  const FeatureMatrix x = oracle::random_features(10, 2, rng);
  const SparseAffinity raw = oracle::random_symmetric_graph(10, 0.4, rng);
  const SparseAffinity g = raw.with_diag_shift(oracle::psd_shift(raw));
  const Prototypes m = random_prototypes(3, 2, rng, PrototypeRule::Means);
  const SoftAssignment anchor = oracle::random_simplex(10, 3, rng);
  const SolverConfig cfg = config_with(1.2);
  EXPECT_NEAR(auxiliary_value(x, g, anchor, anchor, m, cfg), relaxed_objective(x, g, anchor, m, cfg), 1e-9);
}

TEST(AuxiliaryValue, ExactWithoutLaplacian) {
  std::mt19937_64 rng(41);
  const FeatureMatrix x = oracle::random_features(10, 2, rng);
  const SparseAffinity g = oracle::random_symmetric_graph(10, 0.4, rng);
  const Prototypes m = random_prototypes(3, 2, rng, PrototypeRule::Means);
  const SoftAssignment anchor = oracle::random_simplex(10, 3, rng);
  for (int i = 0; i < 5; ++i) {
    const SoftAssignment s = oracle::random_simplex(10, 3, rng);
    EXPECT_NEAR(auxiliary_value(x, g, s, anchor, m, config_with(0.0)), relaxed_objective(x, g, s, m, config_with(0.0)),
                1e-10);
  }
}

TEST(AuxiliaryValue, BoundsRelaxedObjectiveForPsdGraph) {
  std::mt19937_64 rng(42);
  const FeatureMatrix x = oracle::random_features(15, 3, rng);
  const SparseAffinity raw = oracle::random_symmetric_graph(15, 0.3, rng);
  const SparseAffinity g = raw.with_diag_shift(oracle::psd_shift(raw));
  for (auto rule : {PrototypeRule::Means, PrototypeRule::Modes}) {
    const Prototypes m = random_prototypes(4, 3, rng, rule);
    const SolverConfig cfg = config_with(2.0, rule, 1.0);
    for (int i = 0; i < 50; ++i) {
      const SoftAssignment anchor = oracle::random_simplex(15, 4, rng);
      const SoftAssignment s = oracle::random_simplex(15, 4, rng);
      EXPECT_GE(auxiliary_value(x, g, s, anchor, m, cfg) - relaxed_objective(x, g, s, m, cfg), -1e-9);
    }
  }
}

TEST(Solve, SingleClusterIsCentroid) {
  std::mt19937_64 rng(43);
  const FeatureMatrix x = oracle::random_features(9, 2, rng);
  const SolveResult r = solve(x, SparseAffinity::empty(9), Prototypes{Matrix(1, 2, 5.0), PrototypeRule::Means},
                              config_with(0.0));
  for (std::size_t p = 0; p < 9; ++p) EXPECT_EQ(r.assignment.row(p)[0], 1.0);
  EXPECT_TRUE(r.report.converged);
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (std::size_t p = 0; p < 9; ++p) mean += x.row(p)[j] / 9.0;
    EXPECT_NEAR(r.prototypes.row(0)[j], mean, 1e-12);
  }
  EXPECT_EQ(r.report.relaxed_trace.size(), 3u);
}

TEST(Solve, TwoSeparatedBlobsRecoverLabels) {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  for (int p = 0; p < 40; ++p) {
    const int c = p % 2;
    rows.push_back({c * 10.0 + noise(rng), noise(rng)});
    truth.push_back(c);
  }
  const FeatureMatrix x = FeatureMatrix::from_rows(rows);
  const Prototypes init{Matrix(2, 2, std::vector<double>{x.row(0)[0], x.row(0)[1], x.row(1)[0], x.row(1)[1]}),
                        PrototypeRule::Means};
  const SolveResult r = solve(x, SparseAffinity::empty(40), init, config_with(0.0));
  EXPECT_EQ(r.assignment.hard_labels(), truth);
}

TEST(Solve, ClampsAreHonoured) {
  std::mt19937_64 rng(45);
  const FeatureMatrix x = oracle::random_features(12, 2, rng);
  const SparseAffinity g = symmetrize(knn_graph(x, 3), SymmetrizeMode::Max);
  const std::vector<Clamp> clamps{{0, 1}, {5, 0}};
  const SolveResult r = solve(x, g, random_prototypes(2, 2, rng, PrototypeRule::Means), config_with(1.0), clamps);
  EXPECT_EQ(r.assignment.row(0)[1], 1.0);
  EXPECT_EQ(r.assignment.row(5)[0], 1.0);
  EXPECT_TRUE(r.assignment.is_clamped(0));
}

TEST(Solve, WarnsWhenCapsAreHit) {
  std::mt19937_64 rng(46);
  const FeatureMatrix x = oracle::random_features(30, 2, rng);
  const SparseAffinity g = symmetrize(knn_graph(x, 4), SymmetrizeMode::Max);
  SolverConfig cfg = config_with(3.0);
  cfg.inner_max = 1;
  cfg.outer_max = 1;
  const SolveResult r = solve(x, g, random_prototypes(3, 2, rng, PrototypeRule::Means), cfg);
  EXPECT_FALSE(r.report.converged);
  EXPECT_GE(r.report.warnings.size(), 2u);
}

TEST(Solve, ReturnedAssignmentIsStationaryForReturnedPrototypes) {
  std::mt19937_64 rng(47);
  const FeatureMatrix x = oracle::random_features(25, 2, rng);
  const SparseAffinity g = symmetrize(knn_graph(x, 3), SymmetrizeMode::Max);
  SolverConfig cfg = config_with(0.0, PrototypeRule::Modes, estimate_sigma2(x, 3).sigma2);
  const SolveResult r = solve(x, g, random_prototypes(3, 2, rng, PrototypeRule::Modes), cfg);
  const Matrix a = prototype_scores(x, r.prototypes, cfg.sigma2);
  const std::vector<double> zeros(3, 0.0);
  for (std::size_t p = 0; p < 25; ++p) {
    const auto expected = s_inner_update(a.row(p), zeros, 0.0);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(r.assignment.row(p)[k], expected[k]);
  }
}

TEST(Trace, CsvLayout) {
  SolveReport report;
  report.relaxed_trace = {3.5, 1.25};
  report.inner_trace = {0, 4};
  EXPECT_EQ(format_trace_csv(report), "iteration,relaxed_objective,inner_iters\n0,3.5,0\n1,1.25,4\n");
}

TEST(SolverConfig, RejectsBadSettings) {
  SolverConfig c = config_with(-1.0);
  EXPECT_THROW(c.validate(), Error);
  c = config_with(1.0, PrototypeRule::Modes, 0.0);
  EXPECT_THROW(c.validate(), Error);
  c = config_with(1.0);
  c.inner_max = 0;
  EXPECT_THROW(c.validate(), Error);
}
