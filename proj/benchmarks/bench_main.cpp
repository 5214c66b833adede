#include <benchmark/benchmark.h>

#include <map>
#include <utility>

#include "lastiter/bounds.hpp"
#include "lastiter/montecarlo.hpp"
#include "lastiter/problems.hpp"
#include "lastiter/sgd.hpp"

using namespace lastiter;

namespace {

const GeneratedProblem& problem(std::size_t n, std::size_t d) {
  static std::map<std::pair<std::size_t, std::size_t>, GeneratedProblem> cache;
  auto it = cache.find({n, d});
  if (it == cache.end())
    it = cache.emplace(std::pair{n, d}, make_least_squares({.n = n, .d = d, .spread = 1.0, .seed = 1})).first;
  return it->second;
}

void BM_SgdRun(benchmark::State& state) {
  const auto& gp = problem(50, static_cast<std::size_t>(state.range(0)));
  RunConfig c;
  c.horizon = 1000;
  for (auto _ : state) {
    c.seed++;
    benchmark::DoNotOptimize(sgd_run(gp.problem, gp.certificate, c).final_iterate);
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_SgdRun)->Arg(2)->Arg(10)->Arg(50);

void BM_MinibatchRun(benchmark::State& state) {
  const auto& gp = problem(50, 10);
  RunConfig c;
  c.horizon = 1000;
  c.batch_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    c.seed++;
    benchmark::DoNotOptimize(minibatch_run(gp.problem, gp.certificate, c).final_iterate);
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_MinibatchRun)->Arg(1)->Arg(5)->Arg(25);

void BM_EstimateGap(benchmark::State& state) {
  const auto& gp = problem(10, 2);
  RunConfig c;
  c.horizon = 400;
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_gap(gp.problem, gp.certificate, c, 200, 0).mean_gap);
}
BENCHMARK(BM_EstimateGap);

void BM_WeightSequence(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(weight_sequence(T, -0.4).sum());
  state.SetComplexityN(T);
}
BENCHMARK(BM_WeightSequence)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oN);

void BM_Theorem1(benchmark::State& state) {
  std::int64_t T = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theorem1_bound(0.01, 1.0, 1.0, 0.5, T));
    T = T % 100000 + 3;
  }
}
BENCHMARK(BM_Theorem1);

void BM_ComplexityHorizon(benchmark::State& state) {
  double eps = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(complexity_horizon(eps, 1.0, 1.0, 0.5));
    eps = eps > 1e-3 ? eps * 0.9 : 1.0;
  }
}
BENCHMARK(BM_ComplexityHorizon);

}  // namespace

BENCHMARK_MAIN();
