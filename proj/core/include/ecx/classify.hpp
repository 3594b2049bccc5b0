#pragma once

#include "ecx/features.hpp"
#include "ecx/label.hpp"
#include "ecx/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ecx {

struct ForestConfig {
  int n_trees = 500;
  int features_per_split = 0;  // 0 selects floor(sqrt(feature count))
  int min_leaf = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  int resolved_features_per_split(std::size_t feature_count) const;
  void validate(std::size_t feature_count) const;
};

// Axis-aligned split x[feature] <= threshold goes left. Leaves have
// feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Label label = Label::ClassA;
  std::uint32_t count_a = 0;
  std::uint32_t count_b = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Label predict(std::span<const double> x) const;
  int depth() const;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::size_t>> bootstrap;  // per tree, drawn with replacement
  std::vector<std::string> schema;
  std::vector<Label> training_labels;
};

// votes is the fraction of trees (or neighbours) backing `label`.
struct Prediction {
  Label label = Label::ClassA;
  double votes = 0.0;
};

// Best Gini split of the rows `rows` over `candidates`, midpoint thresholds
// between distinct consecutive values, each side holding at least min_leaf
// rows. Gains within 1e-12 of the best so far count as ties and keep the
// earlier (candidate order, threshold) split. valid is false when no split
// reduces impurity.
struct Split {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};
Split best_split(std::span<const std::vector<double>> columns, std::span<const Label> labels,
                 std::span<const std::size_t> rows, std::span<const int> candidates,
                 int min_leaf);

double gini_impurity(std::size_t count_a, std::size_t count_b);

// Requires both classes with at least two subjects each (DegenerateCohort).
// Tree t draws from an engine seeded by (seed, t), so results do not depend
// on the thread count.
ForestModel train_forest(std::span<const FeatureVector> features, const ForestConfig& config);

// Majority vote of the trees whose bootstrap excluded each subject; ties go
// to ClassA. Throws NoOOBVotes if a subject is in every bootstrap.
EvalTriple oob_report(const ForestModel& model, std::span<const FeatureVector> features);
std::vector<Label> oob_predictions(const ForestModel& model,
                                   std::span<const FeatureVector> features);

// Majority vote over all trees, ties to ClassA. SchemaMismatch when the
// feature names differ from the training schema.
Prediction predict(const ForestModel& model, const FeatureVector& vector);

// k nearest training vectors by Euclidean distance after z-scoring with the
// training mean and standard deviation; majority label, ties to ClassA.
Prediction nn_baseline(std::span<const FeatureVector> train, const FeatureVector& test,
                       int k);

// Plain-text summary: tree count, node and depth statistics, split counts
// per feature.
std::string model_summary(const ForestModel& model);

// Trains on `train` and labels every element of `test`. All randomness must
// derive from `seed`.
using Classifier = std::function<std::vector<Label>(std::span<const FeatureVector> train,
                                                    std::span<const FeatureVector> test,
                                                    std::uint64_t seed)>;

Classifier forest_classifier(ForestConfig config);
Classifier nearest_neighbor_classifier(int k);

}  // namespace ecx
