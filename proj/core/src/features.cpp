#include "ecx/features.hpp"

#include "ecx/error.hpp"
#include "ecx/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

namespace ecx {

namespace {

std::vector<int> sorted_orders(const std::vector<int>& orders) {
  std::vector<int> out = orders;
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_feature(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void FeatureConfig::validate() const {
  if (difference_orders.empty()) throw BadParams("at least one difference order is required");
  auto orders = sorted_orders(difference_orders);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] < 0 || orders[i] > 4) throw BadParams("difference orders must lie in 0..4");
    if (i > 0 && orders[i] == orders[i - 1]) throw BadParams("duplicate difference order");
  }
  grid.validate();
  family.validate();
}

std::vector<std::string> FeatureConfig::feature_names() const {
  std::vector<std::string> names;
  for (int k : sorted_orders(difference_orders)) {
    if (k == 0) {
      names.emplace_back("A");
      names.emplace_back("B");
    } else {
      names.push_back("AD" + std::to_string(k));
      names.push_back("BD" + std::to_string(k));
    }
  }
  return names;
}

std::vector<std::string> all_feature_names() {
  FeatureConfig all;
  all.difference_orders = {0, 1, 2, 3, 4};
  return all.feature_names();
}

double FeatureVector::value(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw SchemaMismatch("feature '" + name + "' not present");
  return values[static_cast<std::size_t>(it - names.begin())];
}

SubjectFeatures extract_detailed(const Record& record, Label label,
                                 const FeatureConfig& config) {
  config.validate();
  SubjectFeatures out;
  out.features.subject_id = record.subject_id();
  out.features.label = label;
  out.features.names = config.feature_names();
  for (int k : sorted_orders(config.difference_orders)) {
    const Record transformed = k == 0 ? record : difference(record, k);
    Estimate est;
    try {
      est = estimate_detailed(transformed, config.grid, config.family);
    } catch (const FTrivialRecord& e) {
      throw FTrivialRecord("order " + std::to_string(k) + " is F-trivial: " + e.what(), k);
    }
    if (!std::isfinite(est.coefficients.a) || !std::isfinite(est.coefficients.b)) {
      throw DegenerateFit("order " + std::to_string(k) + " produced non-finite coefficients");
    }
    out.features.values.push_back(est.coefficients.a);
    out.features.values.push_back(est.coefficients.b);
    out.details.push_back({k, std::move(est)});
  }
  return out;
}

FeatureVector extract(const Record& record, Label label, const FeatureConfig& config) {
  return extract_detailed(record, label, config).features;
}

CohortDetails extract_cohort_detailed(std::span<const LabeledRecord> records,
                                      const FeatureConfig& config, std::size_t threads) {
  config.validate();
  std::vector<std::optional<SubjectFeatures>> results(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    try {
      results[i] = extract_detailed(records[i].record, records[i].label, config);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  CohortDetails out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (results[i]) {
      out.subjects.push_back(std::move(*results[i]));
    } else {
      out.failures.push_back({records[i].record.subject_id(), errors[i]});
    }
  }
  return out;
}

CohortFeatures extract_cohort(std::span<const LabeledRecord> records,
                              const FeatureConfig& config, std::size_t threads) {
  auto detailed = extract_cohort_detailed(records, config, threads);
  CohortFeatures out;
  out.vectors.reserve(detailed.subjects.size());
  for (auto& s : detailed.subjects) out.vectors.push_back(std::move(s.features));
  out.failures = std::move(detailed.failures);
  return out;
}

void write_feature_table(std::ostream& out, std::span<const FeatureVector> vectors,
                         const std::vector<std::string>& names, const LabelNames& labels) {
  out << "subject_id,label";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& v : vectors) {
    if (v.names != names) {
      throw SchemaMismatch("subject '" + v.subject_id + "' has a different feature schema");
    }
    out << v.subject_id << ',' << labels.name(v.label);
    for (double x : v.values) out << ',' << format_feature(x);
    out << '\n';
  }
}

void write_feature_table(const std::filesystem::path& path,
                         std::span<const FeatureVector> vectors,
                         const std::vector<std::string>& names, const LabelNames& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_feature_table(out, vectors, names, labels);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<FeatureVector> read_feature_table(const std::filesystem::path& path,
                                              const LabelNames& labels) {
  const std::string content = text::read_file(path);
  std::vector<FeatureVector> out;
  std::vector<std::string> names;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const auto line = text::trim(std::string_view(content).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    const auto fields = text::split(line, ',');
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "subject_id" || fields[1] != "label") {
        throw ParseError(path.string() + ": header must start with subject_id,label and name "
                                         "at least one feature",
                         line_no, 0);
      }
      names.assign(fields.begin() + 2, fields.end());
      header_seen = true;
      continue;
    }
    if (fields.size() != names.size() + 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(names.size() + 2) + " fields",
                       line_no, 0);
    }
    FeatureVector v;
    v.subject_id = fields[0];
    try {
      v.label = labels.parse(fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                       line_no, 2);
    }
    v.names = names;
    for (std::size_t j = 2; j < fields.size(); ++j) {
      double x = 0.0;
      if (!text::parse_double(fields[j], x)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": invalid number '" + fields[j] + "'",
                         line_no, j + 1);
      }
      v.values.push_back(x);
    }
    out.push_back(std::move(v));
  }
  if (!header_seen) throw ParseError(path.string() + ": empty feature table", 1, 0);
  return out;
}

std::vector<FeatureVector> select_features(std::span<const FeatureVector> vectors,
                                           const std::vector<std::string>& names) {
  std::vector<FeatureVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    FeatureVector s;
    s.subject_id = v.subject_id;
    s.label = v.label;
    s.names = names;
    for (const auto& n : names) s.values.push_back(v.value(n));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ecx
