#include "ecx/classify.hpp"
#include "ecx/complexity.hpp"
#include "ecx/features.hpp"
#include "ecx/recon.hpp"
#include "ecx/signal.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace ecx;

std::vector<double> channel(std::size_t n) {
  const auto r = normalize(gen_fbm_like(n, 0.5, 1, 1)).first;
  const auto x = r.channel(0);
  return {x.begin(), x.end()};
}

void BM_FamilyErrors(benchmark::State& state) {
  const auto values = channel(static_cast<std::size_t>(state.range(0)));
  const auto plan = build_plan(0.2, values.size(), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(family_errors(values, plan.placements[0], {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FamilyErrors)->Arg(1024)->Arg(7680);

void BM_FamilyErrorsLeastSquares(benchmark::State& state) {
  const auto values = channel(7680);
  const auto plan = build_plan(0.2, values.size(), 7);
  MethodFamily family;
  family.window = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(family_errors(values, plan.placements[0], family));
  }
}
BENCHMARK(BM_FamilyErrorsLeastSquares);

void BM_Estimate(benchmark::State& state) {
  const auto r = gen_fbm_like(7680, 0.5, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(estimate(r, {}, {}));
}
BENCHMARK(BM_Estimate)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_GenerateFbm(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen_fbm_like(static_cast<std::size_t>(state.range(0)), 0.7, 3, 1));
  }
}
BENCHMARK(BM_GenerateFbm)->Arg(7680)->Arg(1 << 16);

std::vector<FeatureVector> cohort(std::size_t per_class) {
  std::vector<FeatureVector> out;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 1.0);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const double shift = i < per_class ? 0.0 : 1.0;
    out.push_back({"s" + std::to_string(i), i < per_class ? Label::ClassA : Label::ClassB,
                   {"A", "B", "AD4", "BD4"},
                   {d(rng) + shift, d(rng), d(rng) - shift, d(rng)}});
  }
  return out;
}

void BM_TrainForest(benchmark::State& state) {
  const auto data = cohort(static_cast<std::size_t>(state.range(0)));
  ForestConfig config;
  config.n_trees = 500;
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(data, config));
}
BENCHMARK(BM_TrainForest)->Arg(40)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
