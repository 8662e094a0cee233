#include <benchmark/benchmark.h>

#include <vector>

#include "hetmg/phaselab.hpp"
#include "hetmg/replica.hpp"
#include "hetmg/sim.hpp"

namespace {

void BM_CriticalPoint(benchmark::State& state) {
  const auto c = hetmg::two_group_config(0.3, 0.4, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(hetmg::critical_point(c));
}
BENCHMARK(BM_CriticalPoint);

void BM_Solve(benchmark::State& state) {
  const auto c = hetmg::two_group_config(0.3, 0.4, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(hetmg::solve(c));
}
BENCHMARK(BM_Solve);

void BM_BatchStep(benchmark::State& state) {
  const auto c = hetmg::build_config({{1.0, 1.0}}, 0.4);
  hetmg::SimConfig sim;
  sim.n_agents = static_cast<std::size_t>(state.range(0));
  auto [table, game] = hetmg::init_game(c, sim);
  for (auto _ : state) {
    hetmg::batch_step(game, table, c, sim);
    benchmark::DoNotOptimize(game.q.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(table.agents() * table.patterns()));
}
BENCHMARK(BM_BatchStep)->Arg(64)->Arg(256)->Arg(1024);

void BM_MinimizeHamiltonian(benchmark::State& state) {
  const auto c = hetmg::build_config({{1.0, 1.0}}, 0.4);
  hetmg::SimConfig sim;
  sim.n_agents = static_cast<std::size_t>(state.range(0));
  auto [table, game] = hetmg::init_game(c, sim);
  const std::vector<double> start(table.agents(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(hetmg::minimize_hamiltonian(table, c, start, 200000, 1e-10));
}
BENCHMARK(BM_MinimizeHamiltonian)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  hetmg::SweepSpec spec;
  spec.utilities = {hetmg::UtilitySpec::constant(), hetmg::UtilitySpec::linear()};
  spec.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hetmg::sweep(spec));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
