// Acceptance gate: one PASS / FAIL / SKIP line per criterion, non-zero exit
// when any criterion fails.

#include "ecx/classify.hpp"
#include "ecx/commands.hpp"
#include "ecx/complexity.hpp"
#include "ecx/error.hpp"
#include "ecx/eval.hpp"
#include "ecx/features.hpp"
#include "ecx/ingest.hpp"
#include "ecx/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace ecx::acceptance {
namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::Pass : Status::Fail, std::move(detail)};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const std::vector<double> kGrid = RetentionGrid{}.fractions;

// ---------------------------------------------------------------------------

Outcome fit_form() {
  const Stopwatch clock;
  const double hursts[] = {0.3, 0.5, 0.7};
  double worst_r2 = 1.0;
  double worst_b = -1e300;
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    const auto r = gen_fbm_like(7680, hursts[i % 3], derive_seed(11, i), 16);
    const auto c = estimate(r, {}, {});
    worst_r2 = std::min(worst_r2, c.r_squared);
    worst_b = std::max(worst_b, c.b);
    bad += !(c.r_squared >= 0.9 && c.b < 0.0);
  }
  const double t = clock.seconds();
  return verdict(bad == 0 && t < 120.0,
                 fmt::format("20 records, min R2 = {:.4f}, max B = {:.4f}, failures = {}, {:.1f} s",
                             worst_r2, worst_b, bad, t));
}

Record polynomial_record(std::size_t n, const std::vector<double>& coeffs) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = double(k) / double(n - 1);
    double v = 0.0;
    for (auto c = coeffs.rbegin(); c != coeffs.rend(); ++c) v = v * t + *c;
    x[k] = v;
  }
  return Record({x}, 128.0);
}

std::vector<double> spectrum_eps(const Record& r) {
  const auto normalized = normalize(r).first;
  std::vector<double> eps;
  for (double s : kGrid) eps.push_back(spectrum_point(normalized, s, {}).eps);
  return eps;
}

Outcome exact_recovery() {
  std::mt19937_64 rng(5);
  double worst_exact = 0.0;
  double smallest_deg5 = std::numeric_limits<double>::infinity();
  int problems = 0;
  for (std::size_t n : {64, 512, 7680}) {
    for (int degree = 0; degree <= 4; ++degree) {
      for (int trial = 0; trial < 4; ++trial) {
        auto coeffs = testing::uniform_values(rng, std::size_t(degree) + 1);
        coeffs.back() = trial % 2 ? 1.0 : -2.5;
        const auto r = gen_polynomial(n, degree, coeffs);
        for (double e : spectrum_eps(r)) worst_exact = std::max(worst_exact, e);
        try {
          estimate(r, {}, {});
          ++problems;
        } catch (const FTrivialRecord&) {
        }
      }
    }
    for (int trial = 0; trial < 4; ++trial) {
      auto coeffs = testing::uniform_values(rng, 6);
      coeffs.back() = trial % 2 ? 1.0 : -3.0;
      for (double e : spectrum_eps(polynomial_record(n, coeffs))) {
        smallest_deg5 = std::min(smallest_deg5, e);
      }
    }
  }
  return verdict(worst_exact < 1e-9 && problems == 0 && smallest_deg5 > 0.0,
                 fmt::format("degree<=4 max eps = {:.3g}, not flagged = {}, degree 5 min eps = {:.3g}",
                             worst_exact, problems, smallest_deg5));
}

Outcome reconstruction_oracle() {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> length(21, 64);
  double worst = 0.0;
  std::size_t checked = 0;
  int plan_mismatch = 0;
  for (int signal = 0; signal < 100; ++signal) {
    const auto values = testing::uniform_values(rng, length(rng), -1.0, 1.0);
    for (double s : kGrid) {
      const auto plan = build_plan(s, values.size(), 1);
      plan_mismatch += plan.placements != oracle::placements(s, values.size());
      for (const auto& p : plan.placements) {
        if (p.size() < 5) continue;
        const double got = min_error_over_family(values, p, {});
        const double want = oracle::min_error(values, p, {});
        worst = std::max(worst, std::abs(got - want));
        ++checked;
      }
    }
  }
  return verdict(worst <= 1e-10 && plan_mismatch == 0 && checked > 0,
                 fmt::format("{} placements, max |diff| = {:.3g}, plan mismatches = {}", checked,
                             worst, plan_mismatch));
}

Outcome monotonicity() {
  int violations = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    // Brownian noise: fbm-like records at hurst 0.5.
    const auto spec = compute_spectrum(gen_fbm_like(7680, 0.5, derive_seed(31, seed), 16), {}, {});
    for (std::size_t i = 1; i < spec.points.size(); ++i) {
      // Grid runs from large S to small S, so eps must strictly increase along it.
      const double gap = spec.points[i].eps - spec.points[i - 1].eps;
      tightest = std::min(tightest, gap / spec.points[i - 1].eps);
      violations += !(gap > 0.0);
    }
  }
  return verdict(violations == 0,
                 fmt::format("20 seeds x 6 points, violations = {}, smallest relative step = {:.4f}",
                             violations, tightest));
}

// Shared 40 + 40 fbm cohort used by the classification criteria.
struct Cohort {
  std::vector<FeatureVector> features;
  double extraction_seconds = 0.0;
};

const Cohort& fbm_cohort() {
  static const Cohort cohort = [] {
    const Stopwatch clock;
    std::vector<LabeledRecord> records;
    for (std::size_t i = 0; i < 80; ++i) {
      const bool b = i >= 40;
      auto r = gen_fbm_like(7680, b ? 0.7 : 0.3, derive_seed(2024, i), 16)
                   .with_subject_id(fmt::format("{}{:02}", b ? "b" : "a", i % 40));
      records.push_back({std::move(r), b ? Label::ClassB : Label::ClassA});
    }
    auto out = extract_cohort(records, {});
    if (!out.failures.empty()) throw std::runtime_error("cohort extraction failed");
    return Cohort{std::move(out.vectors), clock.seconds()};
  }();
  return cohort;
}

Outcome scale_and_shuffle() {
  // Scaling: exact factors must leave (A, B) bit-identical; generic factors
  // are held to 1e-12, the rounding of c * x itself.
  const auto r = gen_fbm_like(7680, 0.5, 99, 16);
  const auto base = estimate(r, {}, {});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> generic(-1e3, 1e3);
  std::uniform_int_distribution<int> exponent(-20, 20);
  int exact_mismatch = 0;
  double generic_dev = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::vector<double>> exact, loose;
    for (std::size_t c = 0; c < r.channels(); ++c) {
      const auto x = r.channel(c);
      const double fe = std::ldexp(trial % 2 ? -1.0 : 1.0, exponent(rng));
      const double fg = generic(rng);
      std::vector<double> e(x.begin(), x.end()), g(x.begin(), x.end());
      for (double& v : e) v *= fe;
      for (double& v : g) v *= fg;
      exact.push_back(std::move(e));
      loose.push_back(std::move(g));
    }
    const auto ce = estimate(Record(exact, 128.0), {}, {});
    const auto cg = estimate(Record(loose, 128.0), {}, {});
    exact_mismatch += ce.a != base.a || ce.b != base.b;
    generic_dev = std::max({generic_dev, std::abs(cg.a - base.a), std::abs(cg.b - base.b)});
  }

  // Shuffle: permuted labels on the fbm cohort, fresh permutation and forest per seed.
  const auto& cohort = fbm_cohort().features;
  std::vector<double> acc;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto shuffled = cohort;
    std::vector<Label> labels;
    for (const auto& v : shuffled) labels.push_back(v.label);
    std::mt19937_64 perm(seed);
    std::shuffle(labels.begin(), labels.end(), perm);
    for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
    ForestConfig fc;
    fc.seed = seed;
    acc.push_back(oob_report(train_forest(shuffled, fc), shuffled).accuracy);
  }
  double mean = 0.0;
  for (double a : acc) mean += a / double(acc.size());
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  const bool ok = exact_mismatch == 0 && generic_dev <= 1e-12 && std::abs(mean - 0.5) <= 0.15;
  return verdict(ok, fmt::format("exact-scale mismatches = {}, generic-scale max dev = {:.2g}; "
                                 "shuffled OOB mean = {:.3f} (range {:.3f}..{:.3f}, 20 seeds)",
                                 exact_mismatch, generic_dev, mean, *lo, *hi));
}

Outcome end_to_end() {
  const Stopwatch clock;
  const auto& cohort = fbm_cohort();
  ForestConfig fc;
  fc.seed = 1;
  const auto oob = oob_report(train_forest(cohort.features, fc), cohort.features);
  const auto cv = kfold_cv(cohort.features, forest_classifier(fc), 10, 1);

  BootstrapOptions bo;
  bo.replications = 1000;
  bo.seed = 1;
  const auto oob_ci = bootstrap_ci(cohort.features, oob_procedure(fc), bo);
  const auto cv_ci = bootstrap_ci(cohort.features, cv_procedure(forest_classifier(fc), 10), bo);
  const auto brackets = [](const CIReport& r) {
    return r.ci_low.accuracy <= r.point.accuracy && r.point.accuracy <= r.ci_high.accuracy;
  };
  const double t = clock.seconds() + cohort.extraction_seconds;
  const bool ok = oob.accuracy >= 0.9 && cv.accuracy >= 0.9 && brackets(oob_ci) &&
                  brackets(cv_ci) && oob_ci.point == oob && cv_ci.point == cv && t < 900.0;
  return verdict(ok, fmt::format("OOB = {:.3f} CI [{:.3f}, {:.3f}], 10-fold CV = {:.3f} CI "
                                 "[{:.3f}, {:.3f}], 1000 replications, {:.0f} s",
                                 oob.accuracy, oob_ci.ci_low.accuracy, oob_ci.ci_high.accuracy,
                                 cv.accuracy, cv_ci.ci_low.accuracy, cv_ci.ci_high.accuracy, t));
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult ecx_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ecx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void expect_ok(const CliResult& r) {
  if (r.code != cli::kExitOk) throw std::runtime_error("ecx failed: " + r.err);
}

// Row value from the report CSV: method,metric,point,ci_low,ci_high.
std::optional<double> report_value(const std::string& csv, const std::string& method,
                                   const std::string& metric) {
  std::istringstream in(csv);
  const std::string prefix = method + "," + metric + ",";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) return std::stod(line.substr(prefix.size()));
  }
  return std::nullopt;
}

// Runs against a real cohort when ECX_DATASET_MANIFEST names its manifest;
// ECX_DATASET_CONFIG may point at a run configuration for loading it.
Outcome table_reproduction() {
  const char* manifest = std::getenv("ECX_DATASET_MANIFEST");
  if (manifest == nullptr || *manifest == '\0') {
    return {Status::Skip, "ECX_DATASET_MANIFEST not set; public EEG cohort not available"};
  }
  testing::TempDir dir;
  std::vector<std::string> base;
  if (const char* cfg = std::getenv("ECX_DATASET_CONFIG"); cfg != nullptr && *cfg != '\0') {
    base = {"--config", cfg};
  }
  auto extract = base;
  extract.insert(extract.end(), {"extract", "--manifest", manifest, "-o",
                                 (dir / "features.csv").string()});
  expect_ok(ecx_cli(extract));
  auto evaluate = base;
  evaluate.insert(evaluate.end(), {"evaluate", "--features", (dir / "features.csv").string(),
                                   "--replications", "1000", "--csv",
                                   (dir / "report.csv").string(), "-o",
                                   (dir / "report.txt").string()});
  expect_ok(ecx_cli(evaluate));
  const auto csv = text::read_file(dir / "report.csv");
  const auto acc = report_value(csv, "RF (OOB)", "accuracy");
  const auto fp = report_value(csv, "RF (OOB)", "false_positive");
  const auto fn = report_value(csv, "RF (OOB)", "false_negative");
  const auto cv = report_value(csv, "RF (k-fold CV)", "accuracy");
  if (!acc || !fp || !fn || !cv) return {Status::Fail, "report is missing RF rows"};
  const bool ok = std::abs(*acc - 83.6) <= 5.0 && std::abs(*fp - 11.6) <= 6.0 &&
                  std::abs(*fn - 20.7) <= 7.0 && std::abs(*cv - 83.2) <= 5.0;
  return verdict(ok, fmt::format("OOB acc {:.1f}%, FP {:.1f}%, FN {:.1f}%, CV acc {:.1f}%", *acc,
                                 *fp, *fn, *cv));
}

Outcome ols_correctness() {
  std::vector<double> x;
  for (double s : kGrid) x.push_back(std::log(s));
  const auto spectrum_of = [&](const std::vector<double>& logs) {
    ComplexitySpectrum sp;
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const double e = std::exp(logs[i]);
      sp.points.push_back({kGrid[i], e, {e}});
    }
    return sp;
  };
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  double exact_dev = 0.0;
  double oracle_dev = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = coef(rng);
    const double b = coef(rng);
    std::vector<double> clean, noisy;
    for (double v : x) {
      clean.push_back(a + b * v);
      noisy.push_back(a + b * v + noise(rng));
    }
    const auto c = fit_coefficients(spectrum_of(clean));
    exact_dev = std::max({exact_dev, std::abs(c.a - a), std::abs(c.b - b)});
    // The oracle sees exactly the logs the fit sees.
    std::vector<double> logs;
    for (double v : noisy) logs.push_back(std::log(std::exp(v)));
    const auto n = fit_coefficients(spectrum_of(noisy));
    const auto want = oracle::ols(x, logs);
    oracle_dev = std::max({oracle_dev, std::abs(n.a - want.a), std::abs(n.b - want.b)});
  }
  return verdict(exact_dev <= 1e-12 && oracle_dev <= 1e-10,
                 fmt::format("1000 lines: exact max dev = {:.2g}, noisy vs oracle max dev = {:.2g}",
                             exact_dev, oracle_dev));
}

Outcome determinism() {
  testing::TempDir dir;
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  const auto pipeline = [&](const std::string& threads, const std::string& tag) {
    const std::vector<std::string> common{"--seed", "42", "--threads", threads};
    auto synth = common;
    synth.insert(synth.end(), {"synth", "--hurst", "0.3,0.7", "--per-class", "10", "--n", "2048",
                               "--channels", "4", "-o", p("data_" + tag)});
    expect_ok(ecx_cli(synth));
    auto extract = common;
    extract.insert(extract.end(), {"extract", "--manifest", p("data_" + tag) + "/manifest.csv",
                                   "-o", p("features_" + tag + ".csv")});
    expect_ok(ecx_cli(extract));
    auto evaluate = common;
    evaluate.insert(evaluate.end(), {"evaluate", "--features", p("features_" + tag + ".csv"),
                                     "--trees", "100", "--replications", "200", "--csv",
                                     p("report_" + tag + ".csv"), "-o",
                                     p("report_" + tag + ".txt")});
    expect_ok(ecx_cli(evaluate));
    auto sweep = common;
    sweep.insert(sweep.end(), {"sweep", "--features", p("features_" + tag + ".csv"), "--trees",
                               "50", "--cap", "2", "-o", p("sweep_" + tag + ".csv")});
    expect_ok(ecx_cli(sweep));
  };
  pipeline("1", "t1");
  pipeline("1", "t1again");
  pipeline("3", "t3");
  int differences = 0;
  std::vector<std::string> diffs;
  for (const std::string tag : {"t1again", "t3"}) {
    for (const std::string file : {"features_", "report_", "sweep_"}) {
      for (const std::string ext : {".csv", ".txt"}) {
        if (file != "report_" && ext == ".txt") continue;
        if (text::read_file(p(file + "t1" + ext)) != text::read_file(p(file + tag + ext))) {
          ++differences;
          diffs.push_back(file + tag + ext);
        }
      }
    }
    const auto m = read_manifest(p("data_t1") + "/manifest.csv", {}, 4, 128.0);
    for (const auto& e : m.entries) {
      if (text::read_file(e.path) != text::read_file(p("data_" + tag) / e.path.filename())) {
        ++differences;
        diffs.push_back("data_" + tag + "/" + e.path.filename().string());
      }
    }
  }
  std::string listed;
  for (const auto& d : diffs) listed += " " + d;
  return verdict(differences == 0,
                 fmt::format("synth/extract/evaluate/sweep at 1, 1 and 3 threads: {} differing "
                             "files{}",
                             differences, listed));
}

}  // namespace
}  // namespace ecx::acceptance

// Optional arguments restrict the run to the named criteria.
int main(int argc, char** argv) {
  using namespace ecx::acceptance;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fit_form", fit_form},
      {"exact_recovery", exact_recovery},
      {"reconstruction_oracle", reconstruction_oracle},
      {"monotonicity", monotonicity},
      {"scale_shuffle_invariance", scale_and_shuffle},
      {"end_to_end_synthetic", end_to_end},
      {"table_reproduction", table_reproduction},
      {"ols_correctness", ols_correctness},
      {"determinism", determinism},
  };
  int failures = 0;
  const std::vector<std::string> only(argv + 1, argv + argc);
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failures += o.status == Status::Fail;
    std::cout << tag << " " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria met" : fmt::format("{} criteria failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
