#include "ecx/run_config.hpp"

#include "ecx/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ecx::cli {

namespace {

std::string trim_copy(std::string_view s) { return std::string(text::trim(s)); }

template <typename T>
T parse_integer(const std::string& value, const std::string& key) {
  T out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw UsageError(key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& value, const std::string& key) {
  double out = 0.0;
  if (!text::parse_double(value, out)) {
    throw UsageError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError(key + ": expected true or false, got '" + value + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += text::format_shortest(v[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string delimiter_name(char c) {
  switch (c) {
    case '\t': return "tab";
    case ' ': return "space";
    default: return std::string(1, c);
  }
}

}  // namespace

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
  std::vector<double> out;
  for (const auto& token : text::split(value, ',')) {
    out.push_back(parse_real(trim_copy(token), what));
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& what) {
  std::vector<int> out;
  for (const auto& token : text::split(value, ',')) {
    out.push_back(parse_integer<int>(trim_copy(token), what));
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig c;
  c.difference_orders = orders;
  c.grid.fractions = grid;
  c.family.max_degree = max_degree;
  c.family.window = window;
  c.family.norm = norm;
  return c;
}

ForestConfig RunConfig::forest_config() const {
  ForestConfig c;
  c.n_trees = trees;
  c.features_per_split = features_per_split;
  c.min_leaf = min_leaf;
  c.seed = seed;
  c.threads = threads;
  return c;
}

RawLayout RunConfig::raw_layout() const { return {layout, delimiter, has_header}; }

LabelNames RunConfig::label_names() const { return {label_a, label_b}; }

BootstrapOptions RunConfig::bootstrap_options() const {
  BootstrapOptions o;
  o.replications = replications;
  o.level = level;
  o.seed = seed;
  o.stratified = stratified;
  o.hold_partition = hold_partition;
  o.threads = threads;
  return o;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim_copy(raw);
  if (key == "seed") seed = parse_integer<std::uint64_t>(value, key);
  else if (key == "threads") threads = parse_integer<std::size_t>(value, key);
  else if (key == "grid") grid = parse_double_list(value, key);
  else if (key == "max_degree") max_degree = parse_integer<int>(value, key);
  else if (key == "window") window = parse_integer<int>(value, key);
  else if (key == "norm") {
    if (value == "sup") norm = ErrorNorm::Sup;
    else if (value == "mean_abs") norm = ErrorNorm::MeanAbsolute;
    else throw UsageError("norm: expected sup or mean_abs, got '" + value + "'");
  }
  else if (key == "orders") orders = parse_int_list(value, key);
  else if (key == "trees") trees = parse_integer<int>(value, key);
  else if (key == "features_per_split") features_per_split = parse_integer<int>(value, key);
  else if (key == "min_leaf") min_leaf = parse_integer<int>(value, key);
  else if (key == "knn_k") knn_k = parse_integer<int>(value, key);
  else if (key == "folds") folds = parse_integer<int>(value, key);
  else if (key == "replications") replications = parse_integer<int>(value, key);
  else if (key == "level") level = parse_real(value, key);
  else if (key == "stratified") stratified = parse_bool(value, key);
  else if (key == "hold_partition") hold_partition = parse_bool(value, key);
  else if (key == "sweep_cap") sweep_cap = parse_integer<int>(value, key);
  else if (key == "synth_kind") {
    if (value != "fbm" && value != "weierstrass" && value != "polynomial") {
      throw UsageError("synth_kind: expected fbm, weierstrass or polynomial, got '" + value + "'");
    }
    synth_kind = value;
  }
  else if (key == "synth_params") synth_params = parse_double_list(value, key);
  else if (key == "per_class") per_class = parse_integer<int>(value, key);
  else if (key == "samples") samples = parse_integer<std::size_t>(value, key);
  else if (key == "synth_channels") synth_channels = parse_integer<std::size_t>(value, key);
  else if (key == "weierstrass_b") weierstrass_b = parse_integer<int>(value, key);
  else if (key == "terms") terms = parse_integer<int>(value, key);
  else if (key == "layout") {
    if (value == "columns") layout = Layout::ColumnsPerChannel;
    else if (value == "channel_major") layout = Layout::ChannelMajorSingleColumn;
    else throw UsageError("layout: expected columns or channel_major, got '" + value + "'");
  }
  else if (key == "delimiter") {
    if (value == "tab") delimiter = '\t';
    else if (value == "space") delimiter = ' ';
    else if (value.size() == 1) delimiter = value[0];
    else throw UsageError("delimiter: expected one character, tab or space");
  }
  else if (key == "has_header") has_header = parse_bool(value, key);
  else if (key == "channels") channels = parse_integer<std::size_t>(value, key);
  else if (key == "sample_rate") sample_rate = parse_real(value, key);
  else if (key == "label_a") label_a = value;
  else if (key == "label_b") label_b = value;
  else if (key == "manifest") manifest = value;
  else if (key == "features") features = value;
  else if (key == "out") out = value;
  else if (key == "spectra") spectra = value;
  else if (key == "report_csv") report_csv = value;
  else throw UsageError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  try {
    feature_config().validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (threads == 0) throw UsageError("threads must be >= 1");
  if (trees < 1) throw UsageError("trees must be >= 1");
  if (features_per_split < 0) throw UsageError("features_per_split must be >= 0");
  if (min_leaf < 1) throw UsageError("min_leaf must be >= 1");
  if (knn_k < 1) throw UsageError("knn_k must be >= 1");
  if (folds < 2) throw UsageError("folds must be >= 2");
  if (replications < 100) throw UsageError("replications must be >= 100");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (sweep_cap < 1) throw UsageError("sweep_cap must be >= 1");
  if (synth_params.empty() || synth_params.size() > 2) {
    throw UsageError("synth_params: expected one or two values");
  }
  if (per_class < 0) throw UsageError("per_class must be >= 0");
  if (samples < 2) throw UsageError("samples must be >= 2");
  if (synth_channels < 1) throw UsageError("synth_channels must be >= 1");
  if (!(sample_rate > 0.0)) throw UsageError("sample_rate must be positive");
  if (label_a.empty() || label_b.empty() || label_a == label_b) {
    throw UsageError("label_a and label_b must be distinct and non-empty");
  }
}

RunConfig parse_config(const std::string& content, const std::string& origin) {
  RunConfig config;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim_copy(body.substr(0, eq));
    try {
      config.set(key, std::string(body.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  return parse_config(content, path.string());
}

void write_config(std::ostream& out, const RunConfig& c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "seed = " << c.seed << '\n'
      << "threads = " << c.threads << '\n'
      << "grid = " << join_doubles(c.grid) << '\n'
      << "max_degree = " << c.max_degree << '\n'
      << "window = " << c.window << '\n'
      << "norm = " << (c.norm == ErrorNorm::Sup ? "sup" : "mean_abs") << '\n'
      << "orders = " << join_ints(c.orders) << '\n'
      << "trees = " << c.trees << '\n'
      << "features_per_split = " << c.features_per_split << '\n'
      << "min_leaf = " << c.min_leaf << '\n'
      << "knn_k = " << c.knn_k << '\n'
      << "folds = " << c.folds << '\n'
      << "replications = " << c.replications << '\n'
      << "level = " << text::format_shortest(c.level) << '\n'
      << "stratified = " << b(c.stratified) << '\n'
      << "hold_partition = " << b(c.hold_partition) << '\n'
      << "sweep_cap = " << c.sweep_cap << '\n'
      << "synth_kind = " << c.synth_kind << '\n'
      << "synth_params = " << join_doubles(c.synth_params) << '\n'
      << "per_class = " << c.per_class << '\n'
      << "samples = " << c.samples << '\n'
      << "synth_channels = " << c.synth_channels << '\n'
      << "weierstrass_b = " << c.weierstrass_b << '\n'
      << "terms = " << c.terms << '\n'
      << "layout = "
      << (c.layout == Layout::ColumnsPerChannel ? "columns" : "channel_major") << '\n'
      << "delimiter = " << delimiter_name(c.delimiter) << '\n'
      << "has_header = " << b(c.has_header) << '\n'
      << "channels = " << c.channels << '\n'
      << "sample_rate = " << text::format_shortest(c.sample_rate) << '\n'
      << "label_a = " << c.label_a << '\n'
      << "label_b = " << c.label_b << '\n'
      << "manifest = " << c.manifest.string() << '\n'
      << "features = " << c.features.string() << '\n'
      << "out = " << c.out.string() << '\n'
      << "spectra = " << c.spectra.string() << '\n'
      << "report_csv = " << c.report_csv.string() << '\n';
}

std::string to_string(const RunConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

}  // namespace ecx::cli
