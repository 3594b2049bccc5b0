#include "ecx/classify.hpp"
#include "ecx/error.hpp"
#include "ecx/eval.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace ecx {
namespace {

using testing::separable_cohort;

ForestConfig forest(int trees, std::uint64_t seed = 1) {
  ForestConfig c;
  c.n_trees = trees;
  c.seed = seed;
  return c;
}

std::vector<FeatureVector> shuffled_labels(std::vector<FeatureVector> v, std::uint64_t seed) {
  auto labels = testing::labels_of(v);
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < v.size(); ++i) v[i].label = labels[i];
  return v;
}

TEST(Gini, Values) {
  EXPECT_EQ(gini_impurity(0, 0), 0.0);
  EXPECT_EQ(gini_impurity(4, 0), 0.0);
  EXPECT_EQ(gini_impurity(2, 2), 0.5);
  EXPECT_NEAR(gini_impurity(1, 3), 0.375, 1e-15);
}

TEST(BestSplit, FourPointNodeMatchesExhaustiveSearch) {
  // Feature 1 separates perfectly between 0.4 and 0.9; feature 0 only partly.
  const std::vector<std::vector<double>> rows{{0.1, 0.2}, {0.5, 0.4}, {0.3, 0.9}, {0.7, 1.0}};
  const std::vector<Label> labels{Label::ClassA, Label::ClassA, Label::ClassB, Label::ClassB};
  const std::vector<std::vector<double>> columns{{0.1, 0.5, 0.3, 0.7}, {0.2, 0.4, 0.9, 1.0}};
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  const std::vector<int> candidates{0, 1};
  const auto got = best_split(columns, labels, idx, candidates, 1);
  const auto want = oracle::exhaustive_split(rows, labels);
  ASSERT_TRUE(got.valid);
  EXPECT_EQ(got.feature, 1);
  EXPECT_EQ(got.feature, want.feature);
  EXPECT_DOUBLE_EQ(got.threshold, want.threshold);
  EXPECT_DOUBLE_EQ(got.threshold, 0.65);
  EXPECT_DOUBLE_EQ(got.gain, 0.5);
}

TEST(BestSplit, RandomNodesMatchExhaustiveSearch) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> grid(0, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    const std::size_t p = 1 + rng() % 4;
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<std::vector<double>> columns(p, std::vector<double>(n));
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng() % 2 ? Label::ClassA : Label::ClassB;
      for (std::size_t f = 0; f < p; ++f) {
        // Coarse values force duplicate feature values and gain ties.
        rows[i][f] = columns[f][i] = grid(rng) * 0.1;
      }
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> candidates(p);
    std::iota(candidates.begin(), candidates.end(), 0);
    const auto got = best_split(columns, labels, idx, candidates, 1);
    const auto want = oracle::exhaustive_split(rows, labels);
    ASSERT_EQ(got.valid, want.valid) << "trial " << trial;
    if (!got.valid) continue;
    EXPECT_NEAR(got.gain, want.gain, 1e-12) << "trial " << trial;
    EXPECT_EQ(got.feature, want.feature) << "trial " << trial;
    EXPECT_DOUBLE_EQ(got.threshold, want.threshold) << "trial " << trial;
  }
}

TEST(Forest, SeparableCohortHasHighOob) {
  const auto cohort = separable_cohort(40, 2.0, 3);
  const auto model = train_forest(cohort, forest(200));
  const auto t = oob_report(model, cohort);
  EXPECT_GE(t.accuracy, 0.95);
  EXPECT_EQ(t.accuracy, 1.0);
  EXPECT_EQ(t.false_positive_rate, 0.0);
  EXPECT_EQ(t.false_negative_rate, 0.0);
}

TEST(Forest, OneClassIsDegenerate) {
  auto cohort = separable_cohort(5, 2.0, 3);
  for (auto& v : cohort) v.label = Label::ClassA;
  EXPECT_THROW(train_forest(cohort, forest(10)), DegenerateCohort);
  EXPECT_THROW(train_forest({}, forest(10)), DegenerateCohort);
}

TEST(Forest, ConfigValidation) {
  const auto cohort = separable_cohort(5, 2.0, 3);
  EXPECT_THROW(train_forest(cohort, forest(0)), BadParams);
  ForestConfig c = forest(5);
  c.features_per_split = 3;
  EXPECT_THROW(train_forest(cohort, c), BadParams);
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  const auto cohort = separable_cohort(30, 0.6, 5);
  ForestConfig c = forest(100, 42);
  const auto one = train_forest(cohort, c);
  c.threads = 4;
  const auto four = train_forest(cohort, c);
  EXPECT_EQ(model_summary(one), model_summary(four));
  EXPECT_EQ(one.bootstrap, four.bootstrap);
  const auto a = oob_report(one, cohort);
  const auto b = oob_report(four, cohort);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.false_positive_rate, b.false_positive_rate);
  EXPECT_EQ(model_summary(train_forest(cohort, forest(100, 42))), model_summary(one));
}

TEST(Forest, SummaryCountsSplits) {
  const auto model = train_forest(separable_cohort(20, 2.0, 1), forest(7));
  const auto s = model_summary(model);
  EXPECT_NE(s.find("trees: 7"), std::string::npos);
  EXPECT_NE(s.find("split counts: x="), std::string::npos);
}

TEST(Forest, SingleTreePredictsItsLeaf) {
  const auto cohort = separable_cohort(20, 0.3, 8);
  const auto model = train_forest(cohort, forest(1));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    FeatureVector v{"q", Label::ClassA, {"x", "y"}, testing::uniform_values(rng, 2, -2, 2)};
    const auto p = predict(model, v);
    EXPECT_EQ(p.label, model.trees[0].predict(v.values));
    EXPECT_EQ(p.votes, 1.0);
  }
}

TEST(Forest, TrainingPointGetsItsLabel) {
  const auto cohort = separable_cohort(40, 2.0, 4);
  const auto model = train_forest(cohort, forest(300));
  for (const auto& v : cohort) {
    const auto p = predict(model, v);
    EXPECT_EQ(p.label, v.label);
    // In-bag trees (about 63%) are always right; out-of-bag ones mostly.
    EXPECT_GE(p.votes, 0.8);
  }
}

TEST(Forest, TiedVotesGoToClassA) {
  ForestModel model;
  model.schema = {"x"};
  DecisionTree a;
  a.nodes.push_back({});
  DecisionTree b = a;
  b.nodes[0].label = Label::ClassB;
  model.trees = {a, b};
  const auto p = predict(model, {"q", Label::ClassB, {"x"}, {0.0}});
  EXPECT_EQ(p.label, Label::ClassA);
  EXPECT_EQ(p.votes, 0.5);
}

TEST(Forest, SchemaMismatch) {
  const auto model = train_forest(separable_cohort(10, 2.0, 4), forest(5));
  EXPECT_THROW(predict(model, {"q", Label::ClassA, {"y", "x"}, {0, 0}}), SchemaMismatch);
  auto bad = separable_cohort(10, 2.0, 4);
  bad[3].names = {"x", "z"};
  EXPECT_THROW(train_forest(bad, forest(5)), SchemaMismatch);
}

TEST(Forest, SubjectInEveryBootstrapHasNoVotes) {
  const auto cohort = separable_cohort(3, 2.0, 4);
  ForestModel model = train_forest(cohort, forest(1));
  model.bootstrap[0] = {0, 1, 2, 3, 4, 5};
  EXPECT_THROW(oob_report(model, cohort), NoOOBVotes);
}

TEST(Forest, OobIsDeterministicForFixedSeed) {
  const auto cohort = separable_cohort(30, 0.4, 6);
  const auto a = oob_report(train_forest(cohort, forest(50, 9)), cohort);
  const auto b = oob_report(train_forest(cohort, forest(50, 9)), cohort);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.false_negative_rate, b.false_negative_rate);
}

double mean_oob(const std::vector<FeatureVector>& cohort, std::uint64_t first_seed, int seeds,
                int trees = 100) {
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) {
    sum += oob_report(train_forest(cohort, forest(trees, first_seed + s)), cohort).accuracy;
  }
  return sum / seeds;
}

TEST(Forest, ShuffledLabelsGiveChanceAccuracy) {
  const auto cohort = separable_cohort(40, 2.0, 10);
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto shuffled = shuffled_labels(cohort, seed);
    sum += oob_report(train_forest(shuffled, forest(100, seed)), shuffled).accuracy;
  }
  EXPECT_NEAR(sum / 20.0, 0.5, 0.15);
}

TEST(Forest, SubjectOrderDoesNotShiftOobDistribution) {
  const auto cohort = separable_cohort(40, 0.5, 12);
  auto permuted = cohort;
  std::mt19937_64 rng(3);
  std::shuffle(permuted.begin(), permuted.end(), rng);
  EXPECT_NEAR(mean_oob(cohort, 1, 20), mean_oob(permuted, 1001, 20), 0.03);
}

TEST(Forest, WiderMarginNeverHurts) {
  for (double gap : {0.2, 0.4, 0.8}) {
    const double narrow = mean_oob(separable_cohort(40, gap, 14), 1, 20, 50);
    const double wide = mean_oob(separable_cohort(40, 2.0 * gap, 14), 1, 20, 50);
    EXPECT_GE(wide, narrow - 0.02) << "gap " << gap;
  }
}

TEST(NearestNeighbour, OneNeighbourReturnsTrainingLabel) {
  const auto cohort = separable_cohort(10, 0.1, 2);
  for (const auto& v : cohort) EXPECT_EQ(nn_baseline(cohort, v, 1).label, v.label);
}

TEST(NearestNeighbour, FullKIsGlobalMajority) {
  auto cohort = separable_cohort(10, 2.0, 2);
  cohort.pop_back();  // 10 ClassA, 9 ClassB
  const FeatureVector far{"q", Label::ClassB, {"x", "y"}, {100.0, 0.0}};
  EXPECT_EQ(nn_baseline(cohort, far, int(cohort.size())).label, Label::ClassA);
}

TEST(NearestNeighbour, MatchesBruteForceOnStandardizedData) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 20;
    std::vector<FeatureVector> train;
    for (std::size_t i = 0; i < n; ++i) {
      train.push_back({"t", rng() % 2 ? Label::ClassA : Label::ClassB, {"u", "v", "w"},
                       {testing::uniform_values(rng, 1, -1, 1)[0],
                        testing::uniform_values(rng, 1, -100, 100)[0],
                        testing::uniform_values(rng, 1, 0, 1e-3)[0]}});
    }
    const FeatureVector q{"q", Label::ClassA, {"u", "v", "w"},
                          {testing::uniform_values(rng, 1, -1, 1)[0],
                           testing::uniform_values(rng, 1, -100, 100)[0],
                           testing::uniform_values(rng, 1, 0, 1e-3)[0]}};
    const int k = 1 + int(rng() % n);
    // Oracle: z-score with population sd, sort by (distance, index).
    std::vector<double> mean(3, 0.0), sd(3, 0.0);
    for (const auto& t : train) {
      for (int f = 0; f < 3; ++f) mean[f] += t.values[f] / double(n);
    }
    for (const auto& t : train) {
      for (int f = 0; f < 3; ++f) sd[f] += (t.values[f] - mean[f]) * (t.values[f] - mean[f]);
    }
    for (auto& s : sd) s = std::sqrt(s / double(n));
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int f = 0; f < 3; ++f) {
        const double z = (train[i].values[f] - q.values[f]) / sd[f];
        s += z * z;
      }
      d.push_back({s, i});
    }
    std::sort(d.begin(), d.end());
    int a = 0;
    for (int j = 0; j < k; ++j) a += train[d[j].second].label == Label::ClassA;
    const Label want = (k - a) > a ? Label::ClassB : Label::ClassA;
    EXPECT_EQ(nn_baseline(train, q, k).label, want) << "trial " << trial;
  }
}

TEST(NearestNeighbour, SeparableCohortUnderCv) {
  const auto cohort = separable_cohort(40, 2.0, 30);
  EXPECT_GE(kfold_cv(cohort, nearest_neighbor_classifier(5), 10, 1).accuracy, 0.9);
}

TEST(NearestNeighbour, Errors) {
  const auto cohort = separable_cohort(3, 2.0, 1);
  EXPECT_THROW(nn_baseline({}, cohort[0], 1), EmptyTrain);
  EXPECT_THROW(nn_baseline(cohort, cohort[0], 0), BadParams);
  EXPECT_THROW(nn_baseline(cohort, cohort[0], 7), BadParams);
}

}  // namespace
}  // namespace ecx
