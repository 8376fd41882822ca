#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "nodeop/allocator.hpp"
#include "nodeop/consensus.hpp"
#include "nodeop/random.hpp"

namespace {

struct Instance {
  std::vector<nodeop::OperatorState> agents;
  std::vector<nodeop::TaskSpec> tasks;
};

Instance make_instance(int n, int m, std::uint64_t seed) {
  nodeop::Rng rng(seed);
  Instance in;
  for (int i = 0; i < n; ++i) {
    nodeop::OperatorState a;
    a.id = nodeop::OperatorId("op" + std::to_string(i));
    a.stake = 1.0;
    in.agents.push_back(a);
  }
  for (int t = 0; t < m; ++t) {
    nodeop::TaskSpec task;
    task.id = nodeop::TaskId("t" + std::to_string(t));
    task.cost_rate = 0.1 * rng.uniform();
    task.corruption_rate = 0.1 * rng.uniform();
    task.resource_cap = 1.0 + 4.0 * rng.uniform();
    for (const auto& a : in.agents) {
      task.consensus_gain[a.id] = 0.5 + rng.uniform();
      task.performance_gain[a.id] = 0.5 + rng.uniform();
    }
    in.tasks.push_back(task);
  }
  return in;
}

void BM_SolveAllocation(benchmark::State& state) {
  const Instance in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 7);
  const auto zero = nodeop::AllocationVector::zeros(in.agents, in.tasks);
  for (auto _ : state) {
    auto result = nodeop::solve_allocation(in.agents, in.tasks, {}, {}, zero);
    benchmark::DoNotOptimize(result.report.welfare);
  }
}
BENCHMARK(BM_SolveAllocation)->Args({2, 1})->Args({3, 2})->Args({8, 4})->Unit(benchmark::kMillisecond);

void BM_RunHeight(benchmark::State& state) {
  std::vector<nodeop::ValidatorDescriptor> vals;
  for (int i = 0; i < state.range(0); ++i) {
    vals.push_back({nodeop::OperatorId("v" + std::to_string(i)), 1.0, nodeop::Behavior::kHonest, 1});
  }
  nodeop::Batch batch{{"a", "b", "c"}};
  nodeop::NetworkModel net;
  net.drop_probability = 0.05;
  net.latency_jitter = 2;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    net.rng_seed = ++seed;
    auto outcome = nodeop::run_height(vals, batch, net, {});
    benchmark::DoNotOptimize(outcome.committed);
  }
}
BENCHMARK(BM_RunHeight)->Arg(4)->Arg(7)->Arg(16);

}  // namespace
BENCHMARK_MAIN();
