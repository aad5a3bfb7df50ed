// Serial reference kernels against their OpenMP counterparts, and the
// structured fit against the generic optimizer.

#include <benchmark/benchmark.h>

#include "remeasure/generic_fit.hpp"
#include "remeasure/inference.hpp"
#include "remeasure/simulate.hpp"

using namespace remeasure;

namespace {

Scenario scenario(Index np) {
  Scenario sc = Scenario::standard(50, 50, np, 0.6, 2.0, 0.0);
  sc.seed = 1;
  return sc;
}

McOptions mc_options() {
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kBatch2, Method::kLs};
  o.replicates = 200;
  return o;
}

void BM_MonteCarloSerial(benchmark::State& st) {
  const auto sc = scenario(25);
  const auto o = mc_options();
  for (auto _ : st) benchmark::DoNotOptimize(monte_carlo_serial(sc, o));
}

void BM_MonteCarloParallel(benchmark::State& st) {
  const auto sc = scenario(25);
  const auto o = mc_options();
  for (auto _ : st) benchmark::DoNotOptimize(monte_carlo(sc, o));
}

struct BootCase {
  Dataset data;
  FitResult fit;
  BootstrapOptions opt;
};

BootCase boot_case() {
  const Dataset d = generate_dataset(scenario(10), 0);
  BootCase c{d, fit_mle(d), {}};
  c.opt.replicates = 300;
  return c;
}

void BM_BootstrapSerial(benchmark::State& st) {
  const auto c = boot_case();
  for (auto _ : st) benchmark::DoNotOptimize(residual_bootstrap_serial(c.data, c.fit, c.opt));
}

void BM_BootstrapParallel(benchmark::State& st) {
  const auto c = boot_case();
  for (auto _ : st) benchmark::DoNotOptimize(residual_bootstrap(c.data, c.fit, c.opt));
}

void BM_FitMle(benchmark::State& st) {
  const Dataset d = generate_dataset(scenario(25), 3);
  for (auto _ : st) benchmark::DoNotOptimize(fit_mle(d));
}

void BM_FitGeneric(benchmark::State& st) {
  const Dataset d = generate_dataset(scenario(25), 3);
  for (auto _ : st) benchmark::DoNotOptimize(fit_generic(d));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BootstrapSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BootstrapParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitMle)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FitGeneric)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
