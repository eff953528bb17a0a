// Microbenchmarks for the hot paths: risk evaluation, the satisficing search
// against its LP-style oracle, online selection, ensemble TD updates, and a
// full knapsack episode.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "oralab/agent.hpp"
#include "oralab/distrl.hpp"
#include "oralab/empirical.hpp"
#include "oralab/env.hpp"
#include "oralab/online.hpp"

namespace {

std::vector<double> random_atoms(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> out(n);
  for (double& x : out) x = u(rng);
  return out;
}

void BM_CvarRight(benchmark::State& state) {
  const auto dist = oralab::make_empirical(random_atoms(
      static_cast<int>(state.range(0)), 7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oralab::cvar_right(dist, 0.3));
  }
}
BENCHMARK(BM_CvarRight)->Arg(8)->Arg(64)->Arg(512);

void BM_SatisficingSearch(benchmark::State& state) {
  const auto atoms = random_atoms(static_cast<int>(state.range(0)), 11);
  const double tau = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(oralab::satisficing_search(atoms, tau, 0.1));
  }
}
BENCHMARK(BM_SatisficingSearch)->Arg(8)->Arg(64)->Arg(512);

void BM_SatisficingLpOracle(benchmark::State& state) {
  const auto atoms = random_atoms(static_cast<int>(state.range(0)), 11);
  const double tau = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(oralab::satisficing_lp_oracle(atoms, tau));
  }
}
BENCHMARK(BM_SatisficingLpOracle)->Arg(8)->Arg(64)->Arg(512);

void BM_FtplSelect(benchmark::State& state) {
  const auto grid = oralab::build_grid(0.1, 1.0, 0.01);
  oralab::LossTracker tracker;
  const auto x_prev = oralab::make_empirical(random_atoms(10, 3));
  const auto x_next = oralab::make_empirical(random_atoms(10, 4));
  const auto spec = oralab::RiskMeasureSpec::cvar(0.1, 1.0);
  oralab::accumulate(tracker, spec, x_prev, x_next, grid);
  std::mt19937_64 rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oralab::ftpl_select(tracker, grid, 0.05, rng));
  }
}
BENCHMARK(BM_FtplSelect);

void BM_TdUpdate(benchmark::State& state) {
  oralab::QuantileTable table(4, 2, 16);
  std::mt19937_64 fill_rng(23);
  table.fill_uniform(0.0, 1.0, fill_rng);
  const oralab::Transition tr{0, 1, 1.0, 2, false};
  const auto beta = oralab::identity_distortion();
  for (auto _ : state) {
    oralab::td_update(table, tr, 0.99, 0.05, beta, 1.0);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_TdUpdate);

void BM_KnapsackEpisode(benchmark::State& state) {
  const auto inst = oralab::random_knapsack_instance(20, 0.4, 10, 20.0, 13);
  oralab::KnapsackEnv env(inst);
  oralab::AgentConfig cfg;
  cfg.adaptation = oralab::AdaptationMode::kFtpl;
  cfg.gamma = 1.0;
  oralab::Agent agent(cfg, env.num_states(), env.num_actions(), 100000, 17);
  std::mt19937_64 rng(19);
  int episode = 0;
  for (auto _ : state) {
    agent.begin_episode(episode++);
    int s = env.reset();
    bool done = false;
    while (!done) {
      const auto oc = agent.act(env, s, rng);
      s = oc.next_state;
      done = oc.done;
    }
    agent.end_episode(0.0, rng);
  }
}
BENCHMARK(BM_KnapsackEpisode);

}  // namespace

BENCHMARK_MAIN();
