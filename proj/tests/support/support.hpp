#pragma once

#include "ecx/features.hpp"
#include "ecx/signal.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace ecx::testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ecx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline Record noise_record(std::uint64_t seed, std::size_t n, std::size_t channels) {
  std::vector<std::vector<double>> ch;
  for (std::size_t c = 0; c < channels; ++c) ch.push_back(seeded_gaussian(n, seed, c));
  return Record(std::move(ch), 128.0, "noise");
}

// Two-feature cohort, classes centred at -gap/2 and +gap/2 on the first axis.
inline std::vector<FeatureVector> separable_cohort(std::size_t per_class, double gap,
                                                   std::uint64_t seed,
                                                   double spread = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-spread, spread);
  std::vector<FeatureVector> out;
  for (Label label : {Label::ClassA, Label::ClassB}) {
    const double centre = label == Label::ClassA ? -gap / 2.0 : gap / 2.0;
    for (std::size_t i = 0; i < per_class; ++i) {
      FeatureVector v;
      v.subject_id = std::string(label == Label::ClassA ? "a" : "b") + std::to_string(i);
      v.label = label;
      v.names = {"x", "y"};
      v.values = {centre + jitter(rng), jitter(rng)};
      out.push_back(std::move(v));
    }
  }
  return out;
}

inline std::vector<Label> labels_of(const std::vector<FeatureVector>& v) {
  std::vector<Label> out;
  for (const auto& f : v) out.push_back(f.label);
  return out;
}

}  // namespace ecx::testing
