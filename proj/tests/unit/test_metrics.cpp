#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slk/error.hpp"
#include "slk/metrics.hpp"

using namespace slk;

namespace {

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> out(n);
  for (int& v : out) v = u(rng);
  return out;
}

std::vector<int> relabel(const std::vector<int>& labels, const std::vector<int>& perm) {
  std::vector<int> out;
  for (int l : labels) out.push_back(perm[static_cast<std::size_t>(l)]);
  return out;
}

}  // namespace

// Contingency [[2,1],[1,2]]: I = (2/3) ln(4/3) + (1/3) ln(2/3), H = ln 2.
constexpr double kHandTableNmi = 0.0817041659455104;

TEST(Nmi, IdenticalPartitions) {
  const std::vector<int> t{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(nmi(t, t), 1.0);
}

TEST(Nmi, RelabelInvariant) {
  const std::vector<int> t{0, 0, 1, 1, 2, 2, 2};
  EXPECT_NEAR(nmi(relabel(t, {2, 0, 1}), t), 1.0, 1e-12);
  std::mt19937_64 rng(51);
  const auto a = random_labels(40, 4, rng), b = random_labels(40, 3, rng);
  EXPECT_NEAR(nmi(relabel(a, {3, 1, 0, 2}), b), nmi(a, b), 1e-12);
  EXPECT_NEAR(nmi(a, b), nmi(b, a), 1e-12);
}

TEST(Nmi, HandBuiltTable) {
  const std::vector<int> pred{0, 0, 0, 1, 1, 1};
  const std::vector<int> truth{0, 0, 1, 0, 1, 1};
  const ContingencyTable table = ContingencyTable::build(pred, truth);
  EXPECT_EQ(table.at(0, 0), 2u);
  EXPECT_EQ(table.at(0, 1), 1u);
  EXPECT_EQ(table.at(1, 0), 1u);
  EXPECT_EQ(table.at(1, 1), 2u);
  EXPECT_NEAR(nmi(pred, truth), kHandTableNmi, 1e-12);
  EXPECT_NEAR(oracle::table_nmi({{2, 1}, {1, 2}}), kHandTableNmi, 1e-12);
}

TEST(Nmi, MatchesEntropyOracleOnRandomTables) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_labels(60, 2 + trial % 4, rng), b = random_labels(60, 2 + trial % 3, rng);
    const ContingencyTable t = ContingencyTable::build(a, b);
    std::vector<std::vector<double>> counts(t.n_pred, std::vector<double>(t.n_true));
    for (std::size_t i = 0; i < t.n_pred; ++i)
      for (std::size_t j = 0; j < t.n_true; ++j) counts[i][j] = static_cast<double>(t.at(i, j));
    EXPECT_NEAR(nmi(a, b), oracle::table_nmi(counts), 1e-12);
  }
}

TEST(Nmi, DegenerateEntropies) {
  const std::vector<int> one{0, 0, 0}, split{0, 1, 1};
  EXPECT_EQ(nmi(one, one), 1.0);
  EXPECT_EQ(nmi(one, split), 0.0);
  EXPECT_EQ(nmi(split, one), 0.0);
}

TEST(Nmi, LengthMismatch) {
  const std::vector<int> a{0, 1}, b{0};
  try {
    nmi(a, b);
    FAIL() << "expected LengthMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  EXPECT_THROW(accuracy_hungarian(a, b), Error);
}

TEST(Accuracy, IdentityAndSwap) {
  const std::vector<int> t{0, 1, 1, 0, 2};
  EXPECT_EQ(accuracy_hungarian(t, t), 1.0);
  EXPECT_EQ(accuracy_hungarian(relabel(t, {1, 0, 2}), t), 1.0);
}

TEST(Accuracy, MatchesPermutationEnumeration) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const int kp = 1 + trial % 6, kt = 1 + (trial / 6) % 6;
    const auto pred = random_labels(30, kp, rng), truth = random_labels(30, kt, rng);
    const double acc = accuracy_hungarian(pred, truth);
    EXPECT_EQ(acc, oracle::permutation_accuracy(pred, truth));
    std::size_t identity = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) identity += pred[i] == truth[i];
    EXPECT_GE(acc, static_cast<double>(identity) / 30.0);
  }
}

TEST(Hungarian, PicksMinimumCost) {
  const Matrix cost(3, 3, std::vector<double>{4, 1, 3, 2, 0, 5, 3, 2, 2});
  const auto assign = hungarian_min_cost(cost);
  double total = 0.0;
  for (std::size_t r = 0; r < 3; ++r) total += cost(r, assign[r]);
  EXPECT_EQ(total, 5.0);
  const Matrix wide(2, 3, std::vector<double>{5, 1, 9, 1, 5, 9});
  EXPECT_EQ(hungarian_min_cost(wide), (std::vector<std::size_t>{1, 0}));
}

TEST(FewshotAccuracy, PerfectTask) {
  const std::vector<TaskOutcome> tasks{{15, 15}};
  const auto s = fewshot_accuracy(tasks);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->mean, 1.0);
  EXPECT_EQ(s->ci95, 0.0);
}

TEST(FewshotAccuracy, MeanOfTwoTasks) {
  const std::vector<TaskOutcome> tasks{{4, 4}, {0, 4}};
  EXPECT_DOUBLE_EQ(fewshot_accuracy(tasks)->mean, 0.5);
  EXPECT_THROW(fewshot_accuracy({}), Error);
  const std::vector<TaskOutcome> empty_only{{0, 0}};
  EXPECT_FALSE(fewshot_accuracy(empty_only).has_value());
}

TEST(FewshotAccuracy, BernoulliSimulation) {
  std::mt19937_64 rng(54);
  std::bernoulli_distribution hit(0.8);
  std::vector<TaskOutcome> tasks(600);
  for (auto& t : tasks) {
    t.total = 75;
    for (int q = 0; q < 75; ++q) t.correct += hit(rng);
  }
  double mean = 0.0;
  for (const auto& t : tasks) mean += static_cast<double>(t.correct) / 75.0 / 600.0;
  double var = 0.0;
  for (const auto& t : tasks) {
    const double d = static_cast<double>(t.correct) / 75.0 - mean;
    var += d * d / 600.0;
  }
  const auto s = fewshot_accuracy(tasks);
  EXPECT_NEAR(s->mean, mean, 1e-12);
  EXPECT_NEAR(s->ci95, 1.96 * std::sqrt(var) / std::sqrt(600.0), 1e-12);
  EXPECT_EQ(s->n_tasks, 600u);
  // Three standard errors of the binomial mean.
  EXPECT_NEAR(s->mean, 0.8, 3.0 * std::sqrt(0.8 * 0.2 / (75.0 * 600.0)));
}
