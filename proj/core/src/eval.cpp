#include "ecx/eval.hpp"

#include "ecx/error.hpp"
#include "ecx/parallel.hpp"
#include "ecx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace ecx {

namespace {

std::vector<Label> labels_of(std::span<const FeatureVector> features) {
  std::vector<Label> out;
  out.reserve(features.size());
  for (const auto& v : features) out.push_back(v.label);
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string interval(double lo, double hi) {
  return "(" + percent(lo) + ", " + percent(hi) + ")";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<std::vector<std::size_t>> make_folds(std::span<const Label> labels, int k,
                                                 std::uint64_t seed, bool stratified) {
  const std::size_t n = labels.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw BadK("k = " + std::to_string(k) + " must lie in 2.." + std::to_string(n));
  }
  auto engine = derive_engine(seed, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  if (stratified) {
    for (Label cls : {Label::ClassA, Label::ClassB}) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == cls) members.push_back(i);
      }
      std::shuffle(members.begin(), members.end(), engine);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) order.push_back(i);
    std::shuffle(order.begin(), order.end(), engine);
  }
  // Dealing consecutively keeps fold sizes, and each class's share, within one.
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < n; ++pos) {
    folds[pos % static_cast<std::size_t>(k)].push_back(order[pos]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvResult kfold_cv_detailed(std::span<const FeatureVector> features,
                           const Classifier& classifier, const CvOptions& options) {
  const auto labels = labels_of(features);
  if (std::find(labels.begin(), labels.end(), Label::ClassA) == labels.end() ||
      std::find(labels.begin(), labels.end(), Label::ClassB) == labels.end()) {
    throw DegenerateCohort("cross-validation needs both classes");
  }
  const auto folds = make_folds(labels, options.k, options.seed, options.stratified);

  CvResult result;
  std::vector<char> in_test(features.size());
  double fp_sum = 0.0;
  double fn_sum = 0.0;
  std::size_t fp_folds = 0;
  std::size_t fn_folds = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (auto i : folds[f]) in_test[i] = 1;
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
    std::vector<Label> truth;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (in_test[i]) {
        test.push_back(features[i]);
        truth.push_back(labels[i]);
      } else {
        train.push_back(features[i]);
      }
    }
    const auto predicted = classifier(train, test, derive_seed(options.seed, f + 1));
    FoldResult fold;
    fold.test_indices = folds[f];
    fold.confusion = tally(truth, predicted);
    fold.triple = fold.confusion.triple();
    result.mean.accuracy += fold.triple.accuracy;
    if (fold.confusion.n_a > 0) {
      fp_sum += fold.triple.false_positive_rate;
      ++fp_folds;
    }
    if (fold.confusion.n_b > 0) {
      fn_sum += fold.triple.false_negative_rate;
      ++fn_folds;
    }
    result.folds.push_back(std::move(fold));
  }
  result.mean.accuracy /= static_cast<double>(folds.size());
  result.mean.false_positive_rate = fp_folds ? fp_sum / static_cast<double>(fp_folds) : 0.0;
  result.mean.false_negative_rate = fn_folds ? fn_sum / static_cast<double>(fn_folds) : 0.0;
  return result;
}

EvalTriple kfold_cv(std::span<const FeatureVector> features, const Classifier& classifier,
                    int k, std::uint64_t seed, bool stratified) {
  return kfold_cv_detailed(features, classifier, {k, seed, stratified}).mean;
}

EvalProcedure oob_procedure(ForestConfig config) {
  return [config](std::span<const FeatureVector> features, std::uint64_t seed) {
    ForestConfig c = config;
    c.seed = seed;
    c.threads = 1;
    return oob_report(train_forest(features, c), features);
  };
}

EvalProcedure cv_procedure(Classifier classifier, int k, bool stratified) {
  return [classifier = std::move(classifier), k, stratified](
             std::span<const FeatureVector> features, std::uint64_t seed) {
    return kfold_cv(features, classifier, k, seed, stratified);
  };
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CIReport bootstrap_ci(std::span<const FeatureVector> features, const EvalProcedure& procedure,
                      const BootstrapOptions& options) {
  if (options.replications < 100) throw BadParams("bootstrap needs at least 100 replications");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw BadParams("confidence level must lie in (0, 1)");
  }
  const auto labels = labels_of(features);
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[labels[i] == Label::ClassA ? 0 : 1].push_back(i);
  }

  CIReport report;
  report.level = options.level;
  report.replications = options.replications;
  report.point = procedure(features, options.seed);

  const auto reps = static_cast<std::size_t>(options.replications);
  std::vector<std::optional<EvalTriple>> draws(reps);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    auto engine = derive_engine(options.seed, r + 1);
    std::vector<FeatureVector> sample;
    sample.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      std::size_t pick;
      if (options.stratified) {
        const auto& pool = members[labels[i] == Label::ClassA ? 0 : 1];
        std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
        pick = pool[d(engine)];
      } else {
        std::uniform_int_distribution<std::size_t> d(0, features.size() - 1);
        pick = d(engine);
      }
      sample.push_back(features[pick]);
    }
    const std::uint64_t seed =
        options.hold_partition ? options.seed : derive_seed(options.seed, r + 1);
    try {
      draws[r] = procedure(sample, seed);
    } catch (const DegenerateCohort&) {
      // Unstratified draws can lose a class; such replicates are skipped.
    } catch (const BadK&) {
    } catch (const NoOOBVotes&) {
    }
  });

  std::vector<double> acc;
  std::vector<double> fp;
  std::vector<double> fn;
  for (const auto& d : draws) {
    if (!d) {
      ++report.failed_replications;
      continue;
    }
    acc.push_back(d->accuracy);
    fp.push_back(d->false_positive_rate);
    fn.push_back(d->false_negative_rate);
  }
  if (acc.empty()) throw DegenerateCohort("every bootstrap replicate failed");
  const double lo = (1.0 - options.level) / 2.0;
  const double hi = 1.0 - lo;
  report.ci_low = {percentile(acc, lo), percentile(fp, lo), percentile(fn, lo)};
  report.ci_high = {percentile(acc, hi), percentile(fp, hi), percentile(fn, hi)};
  return report;
}

RenderedReport render_report(std::span<const NamedReport> reports) {
  if (reports.empty()) throw ValidationError("report needs at least one method");
  for (const auto& r : reports) {
    if (r.name.empty()) throw ValidationError("report method name is empty");
  }

  struct Row {
    std::string method, accuracy, fp, fn;
  };
  std::vector<Row> rows{{"Method", "Accuracy (%)", "False Positive (%)", "False Negative (%)"}};
  std::ostringstream csv;
  csv << "method,metric,point,ci_low,ci_high\n";
  std::vector<std::string> warnings;
  for (const auto& [name, rep] : reports) {
    char level[16];
    std::snprintf(level, sizeof level, "%g%%", 100.0 * rep.level);
    rows.push_back({name, percent(rep.point.accuracy), percent(rep.point.false_positive_rate),
                    percent(rep.point.false_negative_rate)});
    rows.push_back({name + " " + level + " CI",
                    interval(rep.ci_low.accuracy, rep.ci_high.accuracy),
                    interval(rep.ci_low.false_positive_rate, rep.ci_high.false_positive_rate),
                    interval(rep.ci_low.false_negative_rate, rep.ci_high.false_negative_rate)});
    csv << name << ",accuracy," << percent(rep.point.accuracy) << ','
        << percent(rep.ci_low.accuracy) << ',' << percent(rep.ci_high.accuracy) << '\n';
    csv << name << ",false_positive," << percent(rep.point.false_positive_rate) << ','
        << percent(rep.ci_low.false_positive_rate) << ','
        << percent(rep.ci_high.false_positive_rate) << '\n';
    csv << name << ",false_negative," << percent(rep.point.false_negative_rate) << ','
        << percent(rep.ci_low.false_negative_rate) << ','
        << percent(rep.ci_high.false_negative_rate) << '\n';
    if (rep.replications < kLowReplications) {
      warnings.push_back("warning: " + name + ": low replications (" +
                         std::to_string(rep.replications) + " < " +
                         std::to_string(kLowReplications) + ")");
    }
    if (rep.failed_replications > 0) {
      warnings.push_back("warning: " + name + ": " + std::to_string(rep.failed_replications) +
                         " bootstrap replicates skipped");
    }
  }

  std::size_t w[3] = {0, 0, 0};
  for (const auto& r : rows) {
    w[0] = std::max(w[0], r.method.size());
    w[1] = std::max(w[1], r.accuracy.size());
    w[2] = std::max(w[2], r.fp.size());
  }
  std::ostringstream text;
  for (const auto& r : rows) {
    text << pad(r.method, w[0] + 2) << pad(r.accuracy, w[1] + 2) << pad(r.fp, w[2] + 2) << r.fn
         << '\n';
  }
  for (const auto& msg : warnings) text << msg << '\n';
  return {text.str(), csv.str()};
}

}  // namespace ecx
