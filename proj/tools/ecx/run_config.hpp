#pragma once

#include "ecx/classify.hpp"
#include "ecx/eval.hpp"
#include "ecx/features.hpp"
#include "ecx/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecx::cli {

// Bad flags, bad config keys or values, missing inputs. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a run depends on. Serialized as flat `key = value` lines, so a
// dumped config reproduces the run on its own.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // estimation
  std::vector<double> grid{0.50, 0.33, 0.29, 0.25, 0.225, 0.20};
  int max_degree = 4;
  int window = 5;
  ErrorNorm norm = ErrorNorm::Sup;
  std::vector<int> orders{0, 4};

  // classification / evaluation
  int trees = 500;
  int features_per_split = 0;
  int min_leaf = 1;
  int knn_k = 5;
  int folds = 10;
  int replications = 10000;
  double level = 0.95;
  bool stratified = true;
  bool hold_partition = false;
  int sweep_cap = 4;

  // synthesis
  std::string synth_kind = "fbm";  // fbm, weierstrass or polynomial
  std::vector<double> synth_params{0.3, 0.7};  // per class: hurst, a, or degree
  int per_class = 10;
  std::size_t samples = 7680;
  std::size_t synth_channels = 1;
  int weierstrass_b = 3;
  int terms = 20;

  // input format
  Layout layout = Layout::ColumnsPerChannel;
  char delimiter = ',';
  bool has_header = false;
  std::size_t channels = 0;  // 0: detect from the first record
  double sample_rate = 128.0;
  std::string label_a = "A";
  std::string label_b = "B";

  // io paths
  std::filesystem::path manifest;
  std::filesystem::path features;
  std::filesystem::path out;
  std::filesystem::path spectra;
  std::filesystem::path report_csv;

  FeatureConfig feature_config() const;
  ForestConfig forest_config() const;
  RawLayout raw_layout() const;
  LabelNames label_names() const;
  BootstrapOptions bootstrap_options() const;

  // Applies one `key = value` setting; UsageError for unknown keys or
  // unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

RunConfig read_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& content, const std::string& origin = "config");
void write_config(std::ostream& out, const RunConfig& config);
std::string to_string(const RunConfig& config);

// Comma-separated list helpers shared with the flag parser.
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

}  // namespace ecx::cli
