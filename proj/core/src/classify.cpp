#include "ecx/classify.hpp"

#include "ecx/error.hpp"
#include "ecx/parallel.hpp"
#include "ecx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace ecx {

namespace {

constexpr double kMinGain = 1e-12;

struct TrainingSet {
  std::vector<std::vector<double>> columns;  // columns[feature][row]
  std::vector<Label> labels;
  std::vector<std::string> schema;
};

TrainingSet to_columns(std::span<const FeatureVector> features) {
  TrainingSet set;
  if (features.empty()) return set;
  set.schema = features.front().names;
  set.columns.assign(set.schema.size(), std::vector<double>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& v = features[i];
    if (v.names != set.schema || v.values.size() != set.schema.size()) {
      throw SchemaMismatch("subject '" + v.subject_id + "' does not match the feature schema");
    }
    for (std::size_t f = 0; f < set.schema.size(); ++f) {
      if (!std::isfinite(v.values[f])) {
        throw BadParams("subject '" + v.subject_id + "' has a non-finite feature");
      }
      set.columns[f][i] = v.values[f];
    }
    set.labels.push_back(v.label);
  }
  return set;
}

Label majority(std::size_t count_a, std::size_t count_b) {
  return count_b > count_a ? Label::ClassB : Label::ClassA;
}

DecisionTree grow_tree(const TrainingSet& set, std::vector<std::size_t> rows, int mtry,
                       int min_leaf, std::mt19937_64& engine) {
  struct Pending {
    int node;
    std::size_t begin;
    std::size_t end;
  };
  const int feature_count = static_cast<int>(set.columns.size());
  std::vector<int> features(static_cast<std::size_t>(feature_count));

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<Pending> stack{{0, 0, rows.size()}};
  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();

    std::size_t count_a = 0;
    for (std::size_t i = job.begin; i < job.end; ++i) {
      if (set.labels[rows[i]] == Label::ClassA) ++count_a;
    }
    const std::size_t size = job.end - job.begin;
    const std::size_t count_b = size - count_a;
    {
      auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.count_a = static_cast<std::uint32_t>(count_a);
      node.count_b = static_cast<std::uint32_t>(count_b);
      node.label = majority(count_a, count_b);
    }
    if (count_a == 0 || count_b == 0 || size < 2 * static_cast<std::size_t>(min_leaf)) continue;

    // Partial Fisher-Yates draw of mtry distinct features.
    std::iota(features.begin(), features.end(), 0);
    for (int j = 0; j < mtry; ++j) {
      std::uniform_int_distribution<int> pick(j, feature_count - 1);
      std::swap(features[static_cast<std::size_t>(j)],
                features[static_cast<std::size_t>(pick(engine))]);
    }
    const std::span<const std::size_t> node_rows(rows.data() + job.begin, size);
    const Split split = best_split(set.columns, set.labels, node_rows,
                                   std::span<const int>(features.data(), static_cast<std::size_t>(mtry)),
                                   min_leaf);
    if (!split.valid) continue;

    const auto& column = set.columns[static_cast<std::size_t>(split.feature)];
    const auto mid = std::stable_partition(
        rows.begin() + static_cast<std::ptrdiff_t>(job.begin),
        rows.begin() + static_cast<std::ptrdiff_t>(job.end),
        [&](std::size_t r) { return column[r] <= split.threshold; });
    const auto split_at = static_cast<std::size_t>(mid - rows.begin());

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, split_at, job.end});
    stack.push_back({left, job.begin, split_at});
  }
  return tree;
}

void require_two_classes(std::span<const Label> labels) {
  const auto count_a = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::ClassA));
  const std::size_t count_b = labels.size() - count_a;
  if (count_a < 2 || count_b < 2) {
    throw DegenerateCohort("training needs at least two subjects of each class (have " +
                           std::to_string(count_a) + " ClassA, " + std::to_string(count_b) +
                           " ClassB)");
  }
}

std::vector<double> values_in_schema(const FeatureVector& v,
                                     const std::vector<std::string>& schema) {
  if (v.names != schema) {
    throw SchemaMismatch("feature names of '" + v.subject_id +
                         "' differ from the training schema");
  }
  return v.values;
}

}  // namespace

int ForestConfig::resolved_features_per_split(std::size_t feature_count) const {
  if (features_per_split > 0) return features_per_split;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(feature_count)))));
}

void ForestConfig::validate(std::size_t feature_count) const {
  if (n_trees < 1) throw BadParams("n_trees must be positive");
  if (min_leaf < 1) throw BadParams("min_leaf must be positive");
  if (features_per_split < 0) throw BadParams("features_per_split must be >= 0");
  if (feature_count == 0) throw BadParams("no features to train on");
  if (resolved_features_per_split(feature_count) > static_cast<int>(feature_count)) {
    throw BadParams("features_per_split exceeds the feature count");
  }
}

double gini_impurity(std::size_t count_a, std::size_t count_b) {
  const double n = static_cast<double>(count_a + count_b);
  if (n == 0.0) return 0.0;
  const double pa = static_cast<double>(count_a) / n;
  return 2.0 * pa * (1.0 - pa);
}

Split best_split(std::span<const std::vector<double>> columns, std::span<const Label> labels,
                 std::span<const std::size_t> rows, std::span<const int> candidates,
                 int min_leaf) {
  Split best;
  const std::size_t n = rows.size();
  if (n < 2) return best;
  std::size_t total_a = 0;
  for (auto r : rows) {
    if (labels[r] == Label::ClassA) ++total_a;
  }
  const std::size_t total_b = n - total_a;
  const double parent = gini_impurity(total_a, total_b);
  const auto leaf = static_cast<std::size_t>(std::max(min_leaf, 1));

  std::vector<std::pair<double, Label>> sorted(n);
  for (int f : candidates) {
    const auto& column = columns[static_cast<std::size_t>(f)];
    for (std::size_t i = 0; i < n; ++i) sorted[i] = {column[rows[i]], labels[rows[i]]};
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    std::size_t left_a = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (sorted[i].second == Label::ClassA) ++left_a;
      if (sorted[i].first == sorted[i + 1].first) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < leaf || nr < leaf) continue;
      const std::size_t left_b = nl - left_a;
      const double child = (static_cast<double>(nl) * gini_impurity(left_a, left_b) +
                            static_cast<double>(nr) *
                                gini_impurity(total_a - left_a, total_b - left_b)) /
                           static_cast<double>(n);
      const double gain = parent - child;
      if (gain > kMinGain && (!best.valid || gain > best.gain + kMinGain)) {
        double threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        // Adjacent doubles can round the midpoint up onto the right value.
        if (!(threshold < sorted[i + 1].first)) threshold = sorted[i].first;
        best = {true, f, threshold, gain};
      }
    }
  }
  return best;
}

Label DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].label;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

ForestModel train_forest(std::span<const FeatureVector> features, const ForestConfig& config) {
  if (features.empty()) throw DegenerateCohort("no training subjects");
  const TrainingSet set = to_columns(features);
  config.validate(set.schema.size());
  require_two_classes(set.labels);

  const std::size_t n = set.labels.size();
  const int mtry = config.resolved_features_per_split(set.schema.size());
  ForestModel model;
  model.schema = set.schema;
  model.training_labels = set.labels;
  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  model.bootstrap.resize(static_cast<std::size_t>(config.n_trees));

  parallel_for(model.trees.size(), config.threads, [&](std::size_t t) {
    auto engine = derive_engine(config.seed, t);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = draw(engine);
    model.bootstrap[t] = sample;
    model.trees[t] = grow_tree(set, std::move(sample), mtry, config.min_leaf, engine);
  });
  return model;
}

std::vector<Label> oob_predictions(const ForestModel& model,
                                   std::span<const FeatureVector> features) {
  const std::size_t n = features.size();
  if (n != model.training_labels.size()) {
    throw ValidationError("OOB evaluation needs the training subjects in training order");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (const auto& v : features) rows.push_back(values_in_schema(v, model.schema));

  std::vector<std::size_t> votes_a(n, 0);
  std::vector<std::size_t> votes_b(n, 0);
  std::vector<char> in_bag(n);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto r : model.bootstrap[t]) in_bag[r] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      if (model.trees[t].predict(rows[i]) == Label::ClassA) {
        ++votes_a[i];
      } else {
        ++votes_b[i];
      }
    }
  }
  std::vector<Label> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (votes_a[i] + votes_b[i] == 0) {
      throw NoOOBVotes("subject '" + features[i].subject_id +
                       "' appears in every bootstrap sample; raise n_trees");
    }
    out[i] = majority(votes_a[i], votes_b[i]);
  }
  return out;
}

EvalTriple oob_report(const ForestModel& model, std::span<const FeatureVector> features) {
  const auto predicted = oob_predictions(model, features);
  std::vector<Label> truth;
  truth.reserve(features.size());
  for (const auto& v : features) truth.push_back(v.label);
  return tally(truth, predicted).triple();
}

Prediction predict(const ForestModel& model, const FeatureVector& vector) {
  const auto x = values_in_schema(vector, model.schema);
  std::size_t votes_a = 0;
  for (const auto& tree : model.trees) {
    if (tree.predict(x) == Label::ClassA) ++votes_a;
  }
  const std::size_t votes_b = model.trees.size() - votes_a;
  Prediction p;
  p.label = majority(votes_a, votes_b);
  p.votes = static_cast<double>(p.label == Label::ClassA ? votes_a : votes_b) /
            static_cast<double>(model.trees.size());
  return p;
}

Prediction nn_baseline(std::span<const FeatureVector> train, const FeatureVector& test, int k) {
  if (train.empty()) throw EmptyTrain("nearest-neighbour baseline has no training data");
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw BadParams("k must lie in 1..training size");
  }
  const TrainingSet set = to_columns(train);
  const auto x = values_in_schema(test, set.schema);
  const std::size_t p = set.schema.size();
  const std::size_t n = train.size();

  std::vector<double> mean(p, 0.0);
  std::vector<double> sd(p, 0.0);
  for (std::size_t f = 0; f < p; ++f) {
    for (double v : set.columns[f]) mean[f] += v;
    mean[f] /= static_cast<double>(n);
    for (double v : set.columns[f]) sd[f] += (v - mean[f]) * (v - mean[f]);
    sd[f] = std::sqrt(sd[f] / static_cast<double>(n));
    if (sd[f] == 0.0) sd[f] = 1.0;
  }

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < p; ++f) {
      const double z = (set.columns[f][i] - x[f]) / sd[f];
      d2 += z * z;
    }
    dist[i] = {d2, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::size_t votes_a = 0;
  for (int j = 0; j < k; ++j) {
    if (set.labels[dist[static_cast<std::size_t>(j)].second] == Label::ClassA) ++votes_a;
  }
  const std::size_t votes_b = static_cast<std::size_t>(k) - votes_a;
  Prediction pred;
  pred.label = majority(votes_a, votes_b);
  pred.votes = static_cast<double>(pred.label == Label::ClassA ? votes_a : votes_b) /
               static_cast<double>(k);
  return pred;
}

std::string model_summary(const ForestModel& model) {
  std::ostringstream out;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  int min_depth = 0;
  int max_depth = 0;
  double depth_sum = 0.0;
  std::vector<std::size_t> splits(model.schema.size(), 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    nodes += tree.nodes.size();
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        ++leaves;
      } else {
        ++splits[static_cast<std::size_t>(node.feature)];
      }
    }
    const int d = tree.depth();
    min_depth = t == 0 ? d : std::min(min_depth, d);
    max_depth = std::max(max_depth, d);
    depth_sum += d;
  }
  const double trees = static_cast<double>(std::max<std::size_t>(model.trees.size(), 1));
  out << "trees: " << model.trees.size() << '\n';
  out << "nodes: " << nodes << " (leaves " << leaves << ")\n";
  out << "depth: min " << min_depth << ", mean " << depth_sum / trees << ", max " << max_depth
      << '\n';
  out << "split counts:";
  for (std::size_t f = 0; f < splits.size(); ++f) {
    out << ' ' << model.schema[f] << '=' << splits[f];
  }
  out << '\n';
  return out.str();
}

Classifier forest_classifier(ForestConfig config) {
  return [config](std::span<const FeatureVector> train, std::span<const FeatureVector> test,
                  std::uint64_t seed) {
    ForestConfig c = config;
    c.seed = seed;
    const auto model = train_forest(train, c);
    std::vector<Label> out;
    out.reserve(test.size());
    for (const auto& v : test) out.push_back(predict(model, v).label);
    return out;
  };
}

Classifier nearest_neighbor_classifier(int k) {
  return [k](std::span<const FeatureVector> train, std::span<const FeatureVector> test,
             std::uint64_t) {
    std::vector<Label> out;
    out.reserve(test.size());
    for (const auto& v : test) out.push_back(nn_baseline(train, v, k).label);
    return out;
  };
}

}  // namespace ecx
