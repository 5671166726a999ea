#include <benchmark/benchmark.h>

#include <vector>

#include "ctes/dqn.hpp"
#include "ctes/env.hpp"
#include "ctes/mlp.hpp"
#include "ctes/oracle.hpp"
#include "ctes/policies.hpp"
#include "ctes/rng.hpp"
#include "ctes/trace.hpp"

namespace {

using namespace ctes;

PlantSpec bench_plant() {
  PlantSpec plant;
  plant.chiller.capacity_kwh_th = 700.0;
  plant.tes.capacity_kwh_th = 1500.0;
  return plant;
}

Trace bench_year() {
  SyntheticParams params;
  params.noise_std = 25.0;
  return generate_synthetic_trace(params, 12);
}

void BM_FeasibleBoundsStep(benchmark::State& state) {
  const PlantSpec plant = bench_plant();
  Rng rng(1);
  for (auto _ : state) {
    const double soc = rng.uniform(0.0, 1500.0);
    const double load = rng.uniform(0.0, 900.0);
    const FeasibleBounds b =
        feasible_bounds(plant.chiller, plant.tes, load, soc);
    const double a = b.infeasible ? 1.0 : rng.uniform(b.lower, b.upper);
    benchmark::DoNotOptimize(step_tes(plant.tes, a * 700.0, load, soc));
  }
}
BENCHMARK(BM_FeasibleBoundsStep);

void BM_ElecPower(benchmark::State& state) {
  PlantSpec plant = bench_plant();
  plant.chiller.capft.c = {0.9, 0.01, 0.0, 0.001, 0.0, -0.0001};
  plant.chiller.eirplr.c = {0.1, 0.5, 0.4};
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        elec_power_kw(plant.chiller, rng.uniform(), 6.67, 29.44));
  }
}
BENCHMARK(BM_ElecPower);

void BM_GreedyEpisodeYear(benchmark::State& state) {
  const Trace trace = bench_year();
  const PlantSpec plant = bench_plant();
  GreedyPolicy greedy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(greedy, trace, plant, 0.0));
  }
}
BENCHMARK(BM_GreedyEpisodeYear)->Unit(benchmark::kMillisecond);

void BM_QForward(benchmark::State& state) {
  Rng rng(3);
  const Mlp net = Mlp::glorot_init(8, {32, 32}, rng);
  std::vector<double> x(8, 0.5);
  for (auto _ : state) {
    x[7] = rng.uniform();
    benchmark::DoNotOptimize(net.forward(x));
  }
}
BENCHMARK(BM_QForward);

void BM_TdUpdate(benchmark::State& state) {
  Rng rng(4);
  Mlp policy_net = Mlp::glorot_init(8, {32, 32}, rng);
  const Mlp target_net = policy_net;
  std::vector<double> grid(11);
  for (int i = 0; i <= 10; ++i) grid[i] = i / 10.0;
  ReplayBuffer replay(4096);
  for (int i = 0; i < 4096; ++i) {
    Transition t;
    t.state.assign(7, rng.uniform());
    t.action_index = static_cast<int>(rng.below(11));
    t.executed_plr = grid[t.action_index];
    t.cost = rng.uniform(0.0, 100.0);
    t.next_state.assign(7, rng.uniform());
    t.next_lower = 0.0;
    t.next_upper = 1.0;
    t.terminal = false;
    replay.push(std::move(t));
  }
  AdamOptimizer adam(policy_net.num_params(), 0.01);
  std::vector<std::size_t> batch;
  for (auto _ : state) {
    replay.sample_indices(128, rng, batch);
    benchmark::DoNotOptimize(td_update(policy_net, target_net, replay, batch,
                                       0.99, grid, 100.0, adam));
  }
}
BENCHMARK(BM_TdUpdate)->Unit(benchmark::kMicrosecond);

void BM_DpSolveTwoDays(benchmark::State& state) {
  SyntheticParams params;
  params.days = 2;
  params.noise_std = 10.0;
  const Trace trace = generate_synthetic_trace(params, 5);
  const PlantSpec plant = bench_plant();
  DpConfig config;
  config.soc_nodes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dp_solve(trace, plant, config));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DpSolveTwoDays)->Arg(11)->Arg(51)->Arg(201)->Complexity();

}  // namespace

BENCHMARK_MAIN();
