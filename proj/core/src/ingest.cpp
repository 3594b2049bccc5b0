#include "ecx/ingest.hpp"

#include "ecx/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace ecx {

namespace text {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  if (delimiter == ' ' || delimiter == '\t') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      out.emplace_back(line.substr(start, i - start));
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delimiter, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace text

namespace {

struct Line {
  std::size_t number;  // 1-based
  std::string_view content;
};

// Non-blank lines with their physical line numbers; drops the first one
// when the file carries a header.
std::vector<Line> data_lines(std::string&&, bool) = delete;  // lines view into content

std::vector<Line> data_lines(const std::string& content, bool has_header) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  bool header_pending = has_header;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++number;
    const auto view = text::trim(std::string_view(content).substr(start, end - start));
    if (!view.empty()) {
      if (header_pending) {
        header_pending = false;
      } else {
        lines.push_back({number, view});
      }
    }
    if (end == content.size()) break;
    start = end + 1;
  }
  return lines;
}

double parse_token(const std::filesystem::path& path, std::string_view token,
                   std::size_t line, std::size_t column) {
  double v = 0.0;
  if (!text::parse_double(token, v)) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": invalid number '" +
                         std::string(text::trim(token)) + "' in field " +
                         std::to_string(column),
                     line, column);
  }
  return v;
}

[[noreturn]] void rethrow_annotated(const std::string& subject) {
  const std::string prefix = "subject '" + subject + "': ";
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what(), e.line(), e.column());
  } catch (const ShapeError& e) {
    throw ShapeError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const BadParams& e) {
    throw BadParams(prefix + e.what());
  }
}

}  // namespace

Label LabelNames::parse(const std::string& text) const {
  if (text == class_a) return Label::ClassA;
  if (text == class_b) return Label::ClassB;
  throw ValidationError("unknown label '" + text + "' (expected '" + class_a + "' or '" +
                        class_b + "')");
}

void DatasetManifest::validate() const {
  if (channel_count == 0) throw ValidationError("manifest channel_count must be positive");
  if (!(sample_rate_hz > 0.0)) throw ValidationError("manifest sample rate must be positive");
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.subject_id).second) {
      throw ValidationError("duplicate subject id '" + e.subject_id + "'");
    }
  }
}

Record load_record(const std::filesystem::path& path, const RawLayout& layout,
                   std::size_t channel_count, double sample_rate_hz) {
  if (channel_count == 0) throw BadParams("channel_count must be positive");
  const std::string content = text::read_file(path);
  const auto lines = data_lines(content, layout.has_header);

  std::vector<std::vector<double>> channels(channel_count);
  if (layout.layout == Layout::ColumnsPerChannel) {
    for (auto& ch : channels) ch.reserve(lines.size());
    for (const auto& line : lines) {
      const auto fields = text::split(line.content, layout.delimiter);
      if (fields.size() != channel_count) {
        throw ShapeError(path.string() + ":" + std::to_string(line.number) + ": " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(channel_count));
      }
      for (std::size_t c = 0; c < channel_count; ++c) {
        channels[c].push_back(parse_token(path, fields[c], line.number, c + 1));
      }
    }
  } else {
    if (lines.size() % channel_count != 0) {
      throw ShapeError(path.string() + ": " + std::to_string(lines.size()) +
                       " values do not divide into " + std::to_string(channel_count) +
                       " channels");
    }
    const std::size_t n = lines.size() / channel_count;
    for (std::size_t c = 0; c < channel_count; ++c) {
      channels[c].reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& line = lines[c * n + k];
        channels[c].push_back(parse_token(path, line.content, line.number, 1));
      }
    }
  }
  if (channels.front().size() < 2) {
    throw ShapeError(path.string() + ": fewer than two samples per channel");
  }
  return Record(std::move(channels), sample_rate_hz, path.stem().string());
}

std::vector<LabeledRecord> load_cohort(const DatasetManifest& manifest,
                                       const RawLayout& layout) {
  manifest.validate();
  std::vector<LabeledRecord> out;
  out.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    try {
      auto record = load_record(entry.path, layout, manifest.channel_count,
                                manifest.sample_rate_hz);
      out.push_back({record.with_subject_id(entry.subject_id), entry.label});
    } catch (const Error&) {
      rethrow_annotated(entry.subject_id);
    }
  }
  return out;
}

void write_record(const std::filesystem::path& path, const Record& record,
                  const RawLayout& layout) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const char delim = layout.delimiter;
  if (layout.has_header) {
    if (layout.layout == Layout::ColumnsPerChannel) {
      for (std::size_t c = 0; c < record.channels(); ++c) {
        if (c > 0) out << delim;
        out << "ch" << c + 1;
      }
      out << '\n';
    } else {
      out << "value\n";
    }
  }
  if (layout.layout == Layout::ColumnsPerChannel) {
    for (std::size_t t = 0; t < record.samples(); ++t) {
      for (std::size_t c = 0; c < record.channels(); ++c) {
        if (c > 0) out << delim;
        out << text::format_shortest(record.at(t, c));
      }
      out << '\n';
    }
  } else {
    for (std::size_t c = 0; c < record.channels(); ++c) {
      for (double v : record.channel(c)) out << text::format_shortest(v) << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DatasetManifest read_manifest(const std::filesystem::path& path,
                              const LabelNames& labels, std::size_t channel_count,
                              double sample_rate_hz) {
  const std::string content = text::read_file(path);
  auto lines = data_lines(content, false);
  DatasetManifest manifest;
  manifest.channel_count = channel_count;
  manifest.sample_rate_hz = sample_rate_hz;
  const auto base = path.parent_path();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = text::split(lines[i].content, ',');
    if (i == 0 && !fields.empty() && fields[0] == "path") continue;
    if (fields.size() != 3) {
      throw ParseError(path.string() + ":" + std::to_string(lines[i].number) +
                           ": expected path,subject_id,label",
                       lines[i].number, 0);
    }
    std::filesystem::path entry_path(fields[0]);
    if (entry_path.is_relative()) entry_path = base / entry_path;
    Label label;
    try {
      label = labels.parse(fields[2]);
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lines[i].number) + ": " +
                           e.what(),
                       lines[i].number, 3);
    }
    manifest.entries.push_back({entry_path, fields[1], label});
  }
  manifest.validate();
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest,
                    const LabelNames& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "path,subject_id,label\n";
  for (const auto& e : manifest.entries) {
    out << e.path.generic_string() << ',' << e.subject_id << ',' << labels.name(e.label)
        << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::size_t detect_channel_count(const std::filesystem::path& path,
                                 const RawLayout& layout) {
  if (layout.layout != Layout::ColumnsPerChannel) {
    throw BadParams("channel count can only be detected for column-per-channel files");
  }
  const std::string content = text::read_file(path);
  const auto lines = data_lines(content, layout.has_header);
  if (lines.empty()) throw ShapeError(path.string() + ": no data rows");
  return text::split(lines.front().content, layout.delimiter).size();
}

}  // namespace ecx
