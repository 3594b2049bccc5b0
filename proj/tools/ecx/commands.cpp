#include "ecx/commands.hpp"

#include "ecx/classify.hpp"
#include "ecx/error.hpp"
#include "ecx/eval.hpp"
#include "ecx/features.hpp"
#include "ecx/ingest.hpp"
#include "ecx/parallel.hpp"
#include "ecx/rng.hpp"
#include "ecx/signal.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <list>
#include <optional>
#include <random>
#include <sstream>

namespace ecx::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw IoError("write failed: " + path.string());
}

void emit(const RunConfig& config, std::ostream& out, const std::string& content) {
  if (config.out.empty()) {
    out << content;
  } else {
    write_text(config.out, content);
  }
}

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is required");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError(what + " not found: " + path.string());
  }
}

double class_param(const RunConfig& config, Label label) {
  const auto& p = config.synth_params;
  return (label == Label::ClassB && p.size() == 2) ? p[1] : p[0];
}

void check_synth_params(const RunConfig& config) {
  for (double v : config.synth_params) {
    if (config.synth_kind == "fbm") {
      if (!(v > 0.0 && v < 1.0)) {
        throw UsageError("hurst must lie in (0, 1), got " + text::format_shortest(v));
      }
    } else if (config.synth_kind == "weierstrass") {
      if (!(v > 0.0 && v < 1.0) || !(v * config.weierstrass_b > 1.0)) {
        throw UsageError("weierstrass a must lie in (1/b, 1), got " + text::format_shortest(v));
      }
    } else if (v != std::floor(v) || v < 0.0 || v > 4.0) {
      throw UsageError("polynomial degree must be an integer in 0..4, got " +
                       text::format_shortest(v));
    }
  }
  if (config.synth_kind == "weierstrass" && (config.weierstrass_b < 2 || config.terms < 1)) {
    throw UsageError("weierstrass needs b >= 2 and terms >= 1");
  }
}

Record synthesize(const RunConfig& config, Label label, std::uint64_t seed) {
  const double param = class_param(config, label);
  if (config.synth_kind == "fbm") {
    return gen_fbm_like(config.samples, param, seed, config.synth_channels);
  }
  if (config.synth_kind == "weierstrass") {
    // Deterministic: every channel and subject of a class is the same curve.
    auto one = gen_weierstrass(config.samples, param, config.weierstrass_b, config.terms);
    auto ch = one.channel(0);
    std::vector<std::vector<double>> channels(config.synth_channels,
                                              std::vector<double>(ch.begin(), ch.end()));
    return Record(std::move(channels), one.sample_rate_hz());
  }
  const int degree = static_cast<int>(param);
  std::vector<std::vector<double>> channels;
  for (std::size_t c = 0; c < config.synth_channels; ++c) {
    auto engine = derive_engine(seed, c);
    std::normal_distribution<double> gauss;
    std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1);
    for (double& v : coeffs) v = gauss(engine);
    if (coeffs.back() == 0.0) coeffs.back() = 1.0;
    auto poly = gen_polynomial(config.samples, degree, coeffs);
    auto ch = poly.channel(0);
    channels.emplace_back(ch.begin(), ch.end());
  }
  return Record(std::move(channels), static_cast<double>(config.samples - 1));
}

std::string spectrum_csv(const Estimate& est) {
  const auto& c = est.coefficients;
  std::string out = "S,log_S,eps,log_eps,fit_A,fit_B,r2\n";
  for (std::size_t i = 0; i < est.spectrum.points.size(); ++i) {
    const auto& p = est.spectrum.points[i];
    const bool used = i < c.used.size() && c.used[i];
    out += fmt("%.12g", p.s) + ',' + fmt("%.12g", std::log(p.s)) + ',' + fmt("%.12g", p.eps) +
           ',' + (used ? fmt("%.12g", std::log(p.eps)) : std::string("nan")) + ',' +
           fmt("%.12g", c.a) + ',' + fmt("%.12g", c.b) + ',' + fmt("%.12g", c.r_squared) + '\n';
  }
  return out;
}

std::vector<FeatureVector> extract_from_manifest(const RunConfig& config, std::ostream& err,
                                                 bool& all_failed) {
  require_file(config.manifest, "manifest");
  const auto labels = config.label_names();
  const auto layout = config.raw_layout();
  std::size_t channels = config.channels;
  auto manifest = read_manifest(config.manifest, labels, channels == 0 ? 1 : channels,
                                config.sample_rate);
  if (channels == 0 && !manifest.entries.empty()) {
    if (layout.layout != Layout::ColumnsPerChannel) {
      throw UsageError("channels must be set for the channel_major layout");
    }
    channels = detect_channel_count(manifest.entries.front().path, layout);
    manifest.channel_count = channels;
  }
  manifest.validate();

  std::vector<LabeledRecord> records;
  std::vector<ExtractionFailure> failures;
  for (const auto& entry : manifest.entries) {
    try {
      auto rec = load_record(entry.path, layout, manifest.channel_count, manifest.sample_rate_hz);
      records.push_back({rec.with_subject_id(entry.subject_id), entry.label});
    } catch (const Error& e) {
      failures.push_back({entry.subject_id, e.what()});
    }
  }

  auto details = extract_cohort_detailed(records, config.feature_config(), config.threads);
  failures.insert(failures.end(), details.failures.begin(), details.failures.end());

  if (!config.spectra.empty()) {
    fs::create_directories(config.spectra);
    for (const auto& s : details.subjects) {
      for (const auto& d : s.details) {
        write_text(config.spectra /
                       (s.features.subject_id + "_order" + std::to_string(d.order) + ".csv"),
                   spectrum_csv(d.estimate));
      }
    }
  }

  // Failures are listed in manifest order.
  std::stable_sort(failures.begin(), failures.end(), [&](const auto& x, const auto& y) {
    auto pos = [&](const std::string& id) {
      for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].subject_id == id) return i;
      }
      return manifest.entries.size();
    };
    return pos(x.subject_id) < pos(y.subject_id);
  });
  for (const auto& f : failures) err << "failed: " << f.subject_id << ": " << f.message << '\n';

  all_failed = !manifest.entries.empty() && details.subjects.empty();
  std::vector<FeatureVector> vectors;
  vectors.reserve(details.subjects.size());
  for (auto& s : details.subjects) vectors.push_back(std::move(s.features));
  return vectors;
}

}  // namespace

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream&) {
  if (config.out.empty()) throw UsageError("synth needs an output directory (--out)");
  check_synth_params(config);
  const auto labels = config.label_names();
  const auto layout = config.raw_layout();
  fs::create_directories(config.out);

  DatasetManifest manifest;
  manifest.channel_count = config.synth_channels;
  manifest.sample_rate_hz = config.sample_rate;
  const auto per_class = static_cast<std::size_t>(config.per_class);
  for (Label label : {Label::ClassA, Label::ClassB}) {
    for (std::size_t i = 0; i < per_class; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s%04zu", label == Label::ClassA ? "a" : "b", i);
      manifest.entries.push_back({fs::path(std::string(id) + ".csv"), id, label});
    }
  }
  std::vector<std::optional<Record>> records(manifest.entries.size());
  parallel_for(manifest.entries.size(), config.threads, [&](std::size_t k) {
    const auto& e = manifest.entries[k];
    records[k] = synthesize(config, e.label, derive_seed(config.seed, k));
    write_record(config.out / e.path, *records[k], layout);
  });
  write_manifest(config.out / "manifest.csv", manifest, labels);
  out << "wrote " << manifest.entries.size() << " records and "
      << (config.out / "manifest.csv").string() << '\n';
  return kExitOk;
}

int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err) {
  bool all_failed = false;
  const auto vectors = extract_from_manifest(config, err, all_failed);
  std::ostringstream table;
  write_feature_table(table, vectors, config.feature_config().feature_names(),
                      config.label_names());
  emit(config, out, table.str());
  if (all_failed) {
    err << "error: every subject failed\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream&) {
  require_file(config.features, "feature table");
  const auto table = read_feature_table(config.features, config.label_names());
  if (table.empty()) throw DegenerateCohort("feature table has no subjects");

  auto forest = config.forest_config();
  forest.threads = 1;  // parallelism lives at the replicate level
  const auto boot = config.bootstrap_options();
  const std::string cv = std::to_string(config.folds) + "-fold CV";

  std::vector<NamedReport> reports;
  reports.push_back({"RF (OOB)", bootstrap_ci(table, oob_procedure(forest), boot)});
  reports.push_back({"RF (" + cv + ")",
                     bootstrap_ci(table,
                                  cv_procedure(forest_classifier(forest), config.folds,
                                               config.stratified),
                                  boot)});
  reports.push_back({std::to_string(config.knn_k) + "-NN (" + cv + ")",
                     bootstrap_ci(table,
                                  cv_procedure(nearest_neighbor_classifier(config.knn_k),
                                               config.folds, config.stratified),
                                  boot)});
  const auto rendered = render_report(reports);
  emit(config, out, rendered.text);
  if (!config.report_csv.empty()) write_text(config.report_csv, rendered.csv);
  return kExitOk;
}

std::vector<std::vector<std::string>> feature_subsets(const std::vector<std::string>& names,
                                                      int cap) {
  std::vector<std::vector<std::string>> out;
  const std::size_t n = names.size();
  const std::size_t max_size = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(cap, 0)));
  for (std::size_t size = 1; size <= max_size; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      std::vector<std::string> subset;
      for (auto i : idx) subset.push_back(names[i]);
      out.push_back(std::move(subset));
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return out;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<FeatureVector> table;
  if (!config.features.empty()) {
    require_file(config.features, "feature table");
    table = read_feature_table(config.features, config.label_names());
  } else if (!config.manifest.empty()) {
    RunConfig all = config;
    all.orders = {0, 1, 2, 3, 4};
    bool all_failed = false;
    table = extract_from_manifest(all, err, all_failed);
  } else {
    throw UsageError("sweep needs a feature table (--features) or a manifest (--manifest)");
  }
  if (table.empty()) throw DegenerateCohort("no subjects to sweep");

  std::vector<std::string> names;
  for (const auto& name : all_feature_names()) {
    if (std::find(table.front().names.begin(), table.front().names.end(), name) !=
        table.front().names.end()) {
      names.push_back(name);
    }
  }
  if (names.empty()) throw SchemaMismatch("feature table has no coefficient columns");
  const auto subsets = feature_subsets(names, config.sweep_cap);

  auto forest = config.forest_config();
  forest.threads = 1;
  const auto classifier = forest_classifier(forest);
  std::vector<EvalTriple> results(subsets.size());
  parallel_for(subsets.size(), config.threads, [&](std::size_t i) {
    const auto selected = select_features(table, subsets[i]);
    results[i] = kfold_cv(selected, classifier, config.folds, config.seed, config.stratified);
  });

  std::vector<std::size_t> order(subsets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return results[x].accuracy > results[y].accuracy;
  });

  std::string csv = "rank,size,features,accuracy,false_positive,false_negative\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& subset = subsets[order[r]];
    const auto& t = results[order[r]];
    std::string joined;
    for (std::size_t j = 0; j < subset.size(); ++j) joined += (j ? "+" : "") + subset[j];
    csv += std::to_string(r + 1) + ',' + std::to_string(subset.size()) + ',' + joined + ',' +
           fmt("%.4f", t.accuracy) + ',' + fmt("%.4f", t.false_positive_rate) + ',' +
           fmt("%.4f", t.false_negative_rate) + '\n';
  }
  emit(config, out, csv);
  return kExitOk;
}

namespace {

// Flags that map onto config keys. Only flags given on the command line are
// applied, so they override the config file without clobbering it.
class Overrides {
 public:
  void option(CLI::App* app, const std::string& names, const std::string& key,
              const std::string& help) {
    auto& e = entries_.emplace_back();
    e.key = key;
    e.opt = app->add_option(names, e.value, help);
  }
  void flag(CLI::App* app, const std::string& names, const std::string& key,
            const std::string& value, const std::string& help) {
    auto& e = entries_.emplace_back();
    e.key = key;
    e.value = value;
    e.opt = app->add_flag(names, help);
  }
  void apply(RunConfig& config) const {
    for (const auto& e : entries_) {
      if (e.opt->count() > 0) config.set(e.key, e.value);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt = nullptr;
    std::string key;
    std::string value;
  };
  std::list<Entry> entries_;
};

void add_estimation_flags(CLI::App* sub, Overrides& o) {
  o.option(sub, "--orders", "orders", "difference orders, e.g. 0,4");
  o.option(sub, "--grid", "grid", "retention fractions, strictly decreasing");
  o.option(sub, "--max-degree", "max_degree", "highest polynomial degree");
  o.option(sub, "--window", "window", "points per local fit at max degree");
  o.option(sub, "--norm", "norm", "sup or mean_abs");
}

void add_input_flags(CLI::App* sub, Overrides& o) {
  o.option(sub, "--manifest", "manifest", "manifest of path,subject_id,label rows");
  o.option(sub, "--layout", "layout", "columns or channel_major");
  o.option(sub, "--delimiter", "delimiter", "field delimiter, tab or space");
  o.flag(sub, "--header", "has_header", "true", "record files start with a header row");
  o.option(sub, "--channels", "channels", "channel count (0 detects)");
  o.option(sub, "--sample-rate", "sample_rate", "sample rate in Hz");
}

void add_forest_flags(CLI::App* sub, Overrides& o) {
  o.option(sub, "--trees", "trees", "trees per forest");
  o.option(sub, "--mtry", "features_per_split", "features tried per split (0: sqrt)");
  o.option(sub, "--min-leaf", "min_leaf", "minimum rows per leaf");
  o.option(sub, "--folds", "folds", "cross-validation folds");
  o.flag(sub, "--unstratified", "stratified", "false", "plain random folds and resamples");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complexity-coefficient features and two-class evaluation"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path;
  std::string dump_path;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--dump-config", dump_path, "write the effective config here");
  o.option(&app, "--seed", "seed", "master seed");
  o.option(&app, "--threads", "threads", "worker threads");
  o.option(&app, "--spectra", "spectra", "directory for per-record spectrum files");
  o.option(&app, "--label-a", "label_a", "label string of the first class");
  o.option(&app, "--label-b", "label_b", "label string of the second class");
  o.option(&app, "-o,--out", "out", "output path");

  auto* synth = app.add_subcommand("synth", "write synthetic records and a manifest");
  o.option(synth, "--kind", "synth_kind", "fbm, weierstrass or polynomial");
  o.option(synth, "--hurst,--a,--degree,--param", "synth_params",
           "generator parameter per class, e.g. 0.3,0.7");
  o.option(synth, "--per-class", "per_class", "records per class");
  o.option(synth, "--n", "samples", "samples per channel");
  o.option(synth, "--channels", "synth_channels", "channels per record");
  o.option(synth, "--b", "weierstrass_b", "weierstrass frequency ratio");
  o.option(synth, "--terms", "terms", "weierstrass series terms");
  o.option(synth, "--layout", "layout", "columns or channel_major");
  o.option(synth, "--delimiter", "delimiter", "field delimiter, tab or space");

  auto* extract = app.add_subcommand("extract", "estimate coefficients for a manifest");
  add_input_flags(extract, o);
  add_estimation_flags(extract, o);

  auto* evaluate = app.add_subcommand("evaluate", "classify a feature table and report");
  o.option(evaluate, "--features", "features", "feature table");
  add_forest_flags(evaluate, o);
  o.option(evaluate, "--knn", "knn_k", "neighbours for the baseline");
  o.option(evaluate, "--replications", "replications", "bootstrap replications");
  o.option(evaluate, "--level", "level", "confidence level");
  o.flag(evaluate, "--hold-partition", "hold_partition", "true",
         "reuse the evaluation seed in every replicate");
  o.option(evaluate, "--csv", "report_csv", "also write the report as CSV");

  auto* sweep = app.add_subcommand("sweep", "cross-validated accuracy of feature subsets");
  o.option(sweep, "--features", "features", "feature table");
  add_input_flags(sweep, o);
  add_estimation_flags(sweep, o);
  add_forest_flags(sweep, o);
  o.option(sweep, "--cap", "sweep_cap", "largest subset size");

  for (auto* sub : {synth, extract, evaluate, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : read_config(config_path);
    o.apply(config);
    config.validate();
    if (!dump_path.empty()) write_text(dump_path, to_string(config));

    if (synth->parsed()) return cmd_synth(config, out, err);
    if (extract->parsed()) return cmd_extract(config, out, err);
    if (evaluate->parsed()) return cmd_evaluate(config, out, err);
    return cmd_sweep(config, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ecx::cli
