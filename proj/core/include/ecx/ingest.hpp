#pragma once

#include "ecx/label.hpp"
#include "ecx/signal.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace ecx {

enum class Layout {
  ColumnsPerChannel,         // one row per sample, one delimited column per channel
  ChannelMajorSingleColumn,  // one value per line, channel 0 first, then channel 1, ...
};

struct RawLayout {
  Layout layout = Layout::ColumnsPerChannel;
  char delimiter = ',';  // ' ' or '\t' split on any run of blanks
  bool has_header = false;
};

// Literal label strings used in manifests and feature tables.
struct LabelNames {
  std::string class_a = "A";
  std::string class_b = "B";

  Label parse(const std::string& text) const;
  const std::string& name(Label label) const {
    return label == Label::ClassA ? class_a : class_b;
  }
};

struct ManifestEntry {
  std::filesystem::path path;
  std::string subject_id;
  Label label = Label::ClassA;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::size_t channel_count = 1;
  double sample_rate_hz = 128.0;

  // Unique subject ids, positive channel count and rate.
  void validate() const;
};

struct LabeledRecord {
  Record record;
  Label label;
};

// Parses a plain-text record. The subject id defaults to the file stem.
// ParseError carries the 1-based line (and column for delimited files);
// ShapeError reports ragged rows or a channel-major length that does not
// divide by channel_count.
Record load_record(const std::filesystem::path& path, const RawLayout& layout,
                   std::size_t channel_count, double sample_rate_hz);

// Loads every manifest entry in order. Errors are rethrown with the subject
// id prepended.
std::vector<LabeledRecord> load_cohort(const DatasetManifest& manifest,
                                       const RawLayout& layout);

// Shortest round-trip formatting, so load_record(write_record(r)) == r.
void write_record(const std::filesystem::path& path, const Record& record,
                  const RawLayout& layout);

// `path,subject_id,label` rows (header optional on read, always written).
// Relative paths resolve against the manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path,
                              const LabelNames& labels, std::size_t channel_count,
                              double sample_rate_hz);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest,
                    const LabelNames& labels);

// Number of fields on the first data row of a ColumnsPerChannel file.
std::size_t detect_channel_count(const std::filesystem::path& path,
                                 const RawLayout& layout);

// Helpers shared by the feature-table reader.
namespace text {
std::string read_file(const std::filesystem::path& path);
std::vector<std::string> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);
// Strict locale-independent parse of a finite double.
bool parse_double(std::string_view token, double& out);
std::string format_shortest(double value);
}  // namespace text

}  // namespace ecx
