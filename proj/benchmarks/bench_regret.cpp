#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <regret/bounds.hpp>
#include <regret/estimation.hpp>
#include <regret/experiments.hpp>
#include <regret/nuisance.hpp>
#include <regret/synthetic.hpp>

using namespace regret;

namespace {

void BM_DeltaInterval(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<UncertaintySet> sets;
  for (int i = 0; i < 256; ++i) sets.push_back(random_uncertainty_set(rng));
  const auto measures = standard_measures();
  std::size_t i = 0;
  for (auto _ : state) {
    for (const auto& m : measures) {
      benchmark::DoNotOptimize(delta_interval(sets[i], m));
      benchmark::DoNotOptimize(baseline_interval(sets[i], m));
    }
    i = (i + 1) % sets.size();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(measures.size()));
}
BENCHMARK(BM_DeltaInterval);

void BM_LogisticFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  WorldConfig wc;
  wc.seed = 2;
  const auto s = SyntheticWorld(wc).generate(n, 3);
  std::vector<std::uint8_t> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<std::uint8_t>(s.data.d(i));
  const ClassifierConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fit_classifier(s.data.features(), d, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogisticFit)->Arg(2000)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_CrossFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  WorldConfig wc;
  wc.seed = 4;
  const auto s = SyntheticWorld(wc).generate(n, 5);
  EstimationConfig cfg;
  cfg.bootstrap_b = 0;
  cfg.estimator = state.range(1) == 0 ? Estimator::plugin : Estimator::doubly_robust;
  const auto all = standard_measures();
  const std::vector<PerformanceMeasure> measures(all.begin(), all.end());
  for (auto _ : state) benchmark::DoNotOptimize(cross_fit_regret(s.data, measures, Msm{1.4}, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrossFit)->Args({5000, 0})->Args({20000, 0})->Args({20000, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
