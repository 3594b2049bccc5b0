#pragma once

#include "ecx/complexity.hpp"
#include "ecx/ingest.hpp"
#include "ecx/label.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ecx {

// Which difference orders to estimate; order 0 is the original record.
// Order k contributes the pair (ADk, BDk); order 0 contributes (A, B).
struct FeatureConfig {
  std::vector<int> difference_orders{0, 4};
  RetentionGrid grid;
  MethodFamily family;

  void validate() const;
  std::vector<std::string> feature_names() const;
};

struct FeatureVector {
  std::string subject_id;
  Label label = Label::ClassA;
  std::vector<std::string> names;
  std::vector<double> values;

  // Throws SchemaMismatch for an unknown name.
  double value(const std::string& name) const;
};

// The ten coefficient names, orders 0..4: A, B, AD1, BD1, ..., AD4, BD4.
std::vector<std::string> all_feature_names();

struct OrderEstimate {
  int order = 0;
  Estimate estimate;
};

struct SubjectFeatures {
  FeatureVector features;
  std::vector<OrderEstimate> details;  // one per configured order
};

struct ExtractionFailure {
  std::string subject_id;
  std::string message;
};

struct CohortFeatures {
  std::vector<FeatureVector> vectors;
  std::vector<ExtractionFailure> failures;
};

struct CohortDetails {
  std::vector<SubjectFeatures> subjects;
  std::vector<ExtractionFailure> failures;
};

// Differences the raw record, then estimates (normalization happens inside
// the estimator). FTrivialRecord names the offending order.
FeatureVector extract(const Record& record, Label label, const FeatureConfig& config);
SubjectFeatures extract_detailed(const Record& record, Label label,
                                 const FeatureConfig& config);

// Per-subject extraction in input order; a failing subject is reported and
// skipped instead of aborting the batch.
CohortFeatures extract_cohort(std::span<const LabeledRecord> records,
                              const FeatureConfig& config, std::size_t threads = 1);
CohortDetails extract_cohort_detailed(std::span<const LabeledRecord> records,
                                      const FeatureConfig& config,
                                      std::size_t threads = 1);

// `subject_id,label,<names...>` with 12 significant digits.
void write_feature_table(std::ostream& out, std::span<const FeatureVector> vectors,
                         const std::vector<std::string>& names, const LabelNames& labels);
void write_feature_table(const std::filesystem::path& path,
                         std::span<const FeatureVector> vectors,
                         const std::vector<std::string>& names, const LabelNames& labels);
std::vector<FeatureVector> read_feature_table(const std::filesystem::path& path,
                                              const LabelNames& labels);

// Copies of the vectors restricted to `names` (in that order).
std::vector<FeatureVector> select_features(std::span<const FeatureVector> vectors,
                                           const std::vector<std::string>& names);

}  // namespace ecx
