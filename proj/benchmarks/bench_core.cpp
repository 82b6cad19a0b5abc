#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dsm/algorithms.hpp"
#include "dsm/scenario.hpp"

namespace {

dsm::ScenarioData scenario_for(std::size_t consumers) {
  dsm::GenerationRecipe recipe;
  recipe.consumers = consumers;
  return dsm::generate(recipe, dsm::default_base_interval());
}

void BM_Projection(benchmark::State& state) {
  const auto data = scenario_for(1);
  const auto& spec = data.scenario.consumer(0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  dsm::Profile v(spec.horizon());
  dsm::Profile out(spec.horizon());
  for (auto& x : v) x = u(rng);
  for (auto _ : state) {
    dsm::project(v, spec, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Projection);

void BM_Mapping(benchmark::State& state) {
  const auto data = scenario_for(50);
  const dsm::Profile load = dsm::aggregate(data.initial);
  dsm::Profile out(load.size());
  for (auto _ : state) {
    for (const auto& q : data.initial) {
      dsm::mapping_component(q, load, data.scenario.curve(), out);
      benchmark::DoNotOptimize(out.data());
    }
  }
}
BENCHMARK(BM_Mapping);

void BM_CentralIterations(benchmark::State& state) {
  const auto data = scenario_for(static_cast<std::size_t>(state.range(0)));
  dsm::SolverOptions o;
  o.tol = 0.0;
  o.max_iterations = 100;
  o.record_stride = 0;
  for (auto _ : state) {
    auto run = dsm::solve_central(data.scenario, 0.2, dsm::StepSchedule::power_decay(0.51),
                                  data.initial, o);
    benchmark::DoNotOptimize(run.result.residual);
  }
}
BENCHMARK(BM_CentralIterations)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ConsensusIterations(benchmark::State& state) {
  const auto data = scenario_for(50);
  std::mt19937_64 rng(1);
  const auto graph = dsm::generate_topology(50, 4.0, rng);
  const auto weights = dsm::build_weights(graph, 0.5);
  dsm::SolverOptions o;
  o.tol = 0.0;
  o.max_iterations = 100;
  o.record_stride = 0;
  for (auto _ : state) {
    auto run = dsm::solve_consensus(data.scenario, graph, weights,
                                    dsm::StepSchedule::power_decay(0.51), data.initial, o);
    benchmark::DoNotOptimize(run.result.residual);
  }
}
BENCHMARK(BM_ConsensusIterations)->Unit(benchmark::kMillisecond);

void BM_GossipEvents(benchmark::State& state) {
  const auto data = scenario_for(50);
  std::mt19937_64 rng(1);
  const auto graph = dsm::generate_topology(50, 4.0, rng);
  const auto events = dsm::gossip_stream(graph, rng, 5000);
  dsm::SolverOptions o;
  o.tol = 0.0;
  o.max_iterations = events.size();
  o.record_stride = 0;
  for (auto _ : state) {
    auto run = dsm::solve_gossip(data.scenario, graph, events, data.initial, o);
    benchmark::DoNotOptimize(run.result.residual);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_GossipEvents)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
