#include <benchmark/benchmark.h>

#include "conex/confidence_bounds.hpp"
#include "conex/epsmix_agent.hpp"
#include "conex/offline_vilcb.hpp"
#include "conex/stepmix_agent.hpp"

namespace {

using namespace conex;

CountTable warm_counts(const TabularMdp& mdp, int episodes) {
  Rng rng(1);
  const auto pi = StochasticPolicy::uniform(mdp.shape());
  CountTable counts(mdp.shape());
  for (int k = 0; k < episodes; ++k) counts.add(rollout(mdp, pi, rng));
  return counts;
}

Shape shape_arg(const benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  return {s, s, static_cast<std::size_t>(state.range(1))};
}

void BM_EvaluateExact(benchmark::State& state) {
  const auto mdp = generate_random_mdp(shape_arg(state), 1);
  const auto pi = boltzmann_baseline(mdp, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(policy_value(mdp, pi));
}
BENCHMARK(BM_EvaluateExact)->Args({5, 3})->Args({20, 10})->Args({50, 20});

void BM_OptimisticBounds(benchmark::State& state) {
  const auto mdp = generate_random_mdp(shape_arg(state), 2);
  const auto model = estimate_transitions(warm_counts(mdp, 500));
  const BonusParams params{mdp.shape(), 0.01, 1e-4};
  for (auto _ : state) benchmark::DoNotOptimize(compute_optimistic_bounds(model, mdp.rewards(), params));
}
BENCHMARK(BM_OptimisticBounds)->Args({5, 3})->Args({20, 10})->Args({50, 20});

void BM_PolicyEva(benchmark::State& state) {
  const auto mdp = generate_random_mdp(shape_arg(state), 3);
  const auto model = estimate_transitions(warm_counts(mdp, 500));
  const auto pi = boltzmann_baseline(mdp, 10.0);
  const BonusParams params{mdp.shape(), 0.01, 1e-4};
  for (auto _ : state) benchmark::DoNotOptimize(policy_eva(model, mdp.rewards(), pi, params));
}
BENCHMARK(BM_PolicyEva)->Args({5, 3})->Args({20, 10})->Args({50, 20});

void BM_StepMixEpisodes(benchmark::State& state) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  AgentConfig cfg;
  cfg.gamma = 2.2;
  cfg.bonus_scale = 1e-4;
  cfg.baseline = boltzmann_baseline(mdp, 10.0);
  const auto episodes = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Rng rng(4);
    benchmark::DoNotOptimize(run_stepmix(mdp, cfg, episodes, rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(episodes));
}
BENCHMARK(BM_StepMixEpisodes)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EpsMixEpisodes(benchmark::State& state) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  AgentConfig cfg;
  cfg.gamma = 2.2;
  cfg.bonus_scale = 1e-4;
  cfg.baseline = boltzmann_baseline(mdp, 10.0);
  const auto episodes = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Rng roll(5), mix(6);
    benchmark::DoNotOptimize(run_epsmix(mdp, cfg, episodes, roll, mix));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(episodes));
}
BENCHMARK(BM_EpsMixEpisodes)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ViLcb(benchmark::State& state) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(8);
  const auto data = collect_offline(mdp, boltzmann_baseline(mdp, 10.0), static_cast<std::size_t>(state.range(0)), rng);
  const OfflineConfig cfg{0.1, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(vi_lcb(data, mdp.rewards(), cfg));
}
BENCHMARK(BM_ViLcb)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
