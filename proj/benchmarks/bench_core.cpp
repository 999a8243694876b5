#include <benchmark/benchmark.h>

#include "persuade/oracle.hpp"
#include "persuade/sim.hpp"
#include "persuade/solver.hpp"

using namespace persuade;

namespace {

ProblemSpec canon() {
  return validate_problem({1.0, 1.0}, {1.0}, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, {0.0, 0.5, 0.8, 0.95, 1.0});
}

// levels on a concave curve with n jumps
ProblemSpec many_levels(int n) {
  std::vector<double> cuts{0.0};
  std::vector<double> levels;
  for (int i = 1; i < n; ++i) cuts.push_back(static_cast<double>(i) / n);
  cuts.push_back(1.0);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    levels.push_back(1.0 - (1.0 - x) * (1.0 - x));
  }
  return validate_problem({1.3, 0.7}, {0.9}, cuts, levels);
}

void BM_Solve(benchmark::State& state) {
  const auto spec = many_levels(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve(spec));
}
BENCHMARK(BM_Solve)->Arg(5)->Arg(20)->Arg(80);

void BM_Verify(benchmark::State& state) {
  const auto spec = canon();
  const auto v = solve(spec).value;
  for (auto _ : state) benchmark::DoNotOptimize(verify_solution(spec, v));
}
BENCHMARK(BM_Verify);

void BM_ValueIteration(benchmark::State& state) {
  const auto spec = canon();
  const auto grid = make_belief_grid(spec, 1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(spec, 0.01, grid, 1e-6, 1'000'000));
  state.SetComplexityN(static_cast<int64_t>(grid.points.size()));
}
BENCHMARK(BM_ValueIteration)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_PolicyEvaluation(benchmark::State& state) {
  const auto spec = canon();
  const auto pol = solve(spec).policy;
  const auto grid = make_belief_grid(spec, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_policy_discrete(spec, pol, 0.01, grid, 1e-6, 1'000'000));
}
BENCHMARK(BM_PolicyEvaluation)->Unit(benchmark::kMillisecond);

void BM_SimulatePathSteps(benchmark::State& state) {
  const auto spec = canon();
  const auto pol = solve(spec).policy;
  SimConfig cfg;
  cfg.delta = 0.01;
  cfg.horizon = 3000;
  cfg.n_paths = 1000;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, pol, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.horizon * cfg.n_paths));
}
BENCHMARK(BM_SimulatePathSteps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
