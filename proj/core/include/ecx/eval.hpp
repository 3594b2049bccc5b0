#pragma once

#include "ecx/classify.hpp"
#include "ecx/features.hpp"
#include "ecx/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ecx {

// Reports built from fewer replications than this carry a warning.
inline constexpr int kLowReplications = 1000;

struct FoldResult {
  std::vector<std::size_t> test_indices;
  Confusion confusion;
  EvalTriple triple;
};

struct CvResult {
  EvalTriple mean;  // fold metrics averaged; error rates over folds where the class occurs
  std::vector<FoldResult> folds;
};

struct CvOptions {
  int k = 10;
  std::uint64_t seed = 1;
  bool stratified = true;
};

// Random partition of subject indices into k folds whose sizes differ by at
// most one. Stratified partitions also spread each class evenly.
std::vector<std::vector<std::size_t>> make_folds(std::span<const Label> labels, int k,
                                                 std::uint64_t seed, bool stratified);

CvResult kfold_cv_detailed(std::span<const FeatureVector> features,
                           const Classifier& classifier, const CvOptions& options);
EvalTriple kfold_cv(std::span<const FeatureVector> features, const Classifier& classifier,
                    int k = 10, std::uint64_t seed = 1, bool stratified = true);

// An evaluation rerun on each bootstrap replicate.
using EvalProcedure =
    std::function<EvalTriple(std::span<const FeatureVector> features, std::uint64_t seed)>;

EvalProcedure oob_procedure(ForestConfig config);
EvalProcedure cv_procedure(Classifier classifier, int k = 10, bool stratified = true);

struct BootstrapOptions {
  int replications = 10000;
  double level = 0.95;
  std::uint64_t seed = 1;
  bool stratified = true;
  // Reuse `seed` for the procedure in every replicate (same partition
  // stream) instead of drawing a fresh one per replicate.
  bool hold_partition = false;
  std::size_t threads = 1;
};

struct CIReport {
  EvalTriple point;
  EvalTriple ci_low;
  EvalTriple ci_high;
  int replications = 0;
  int failed_replications = 0;  // replicates the procedure rejected
  double level = 0.95;
};

// Percentile bootstrap over whole subjects. The point estimate is the
// procedure on the original cohort with `seed`.
CIReport bootstrap_ci(std::span<const FeatureVector> features, const EvalProcedure& procedure,
                      const BootstrapOptions& options);

// Linear-interpolated (type 7) quantile of unsorted values.
double percentile(std::vector<double> values, double q);

struct NamedReport {
  std::string name;
  CIReport report;
};

struct RenderedReport {
  std::string text;  // aligned table, percentages with one decimal
  std::string csv;   // method,metric,point,ci_low,ci_high
};

RenderedReport render_report(std::span<const NamedReport> reports);

}  // namespace ecx
