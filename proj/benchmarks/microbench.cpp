#include <benchmark/benchmark.h>

#include "tmvn/bounds.hpp"
#include "tmvn/estimator.hpp"
#include "tmvn/harness.hpp"
#include "tmvn/sampler.hpp"
#include "tmvn/special_fn.hpp"
#include "tmvn/tilting.hpp"

namespace {

using namespace tmvn;

void BM_LogProbInterval(benchmark::State& state) {
  double a = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_prob_interval({a, a + 0.5}, 0.3));
    a = a > 8.0 ? -3.0 : a + 0.01;
  }
}
BENCHMARK(BM_LogProbInterval);

void BM_TruncNormInverse(benchmark::State& state) {
  double p = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trunc_norm_inverse({4.0, kInf}, 0.5, p));
    p = p > 0.99 ? 0.001 : p + 0.001;
  }
}
BENCHMARK(BM_TruncNormInverse);

FactoredProblem orthant(Index d) { return factorize(make_problem({.kind = ProblemKind::OrthantHalf, .d = d})); }

void BM_Factorize(benchmark::State& state) {
  const TruncationProblem p = make_problem({.kind = ProblemKind::OrthantHalf, .d = state.range(0)});
  for (auto _ : state) benchmark::DoNotOptimize(factorize(p));
}
BENCHMARK(BM_Factorize)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveTilting(benchmark::State& state) {
  const FactoredProblem fp = orthant(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_tilting(fp));
}
BENCHMARK(BM_SolveTilting)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MetEstimate(benchmark::State& state) {
  const FactoredProblem fp = orthant(state.range(0));
  const TiltingSolution t = solve_tilting(fp);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(fp, Method::Met, t, 12000, 1, {}, {.threads = 1}));
  state.SetItemsProcessed(state.iterations() * 12000);
}
BENCHMARK(BM_MetEstimate)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const FactoredProblem fp = factorize(make_problem({.kind = ProblemKind::Example1, .d = state.range(0)}));
  const TiltingSolution t = solve_tilting(fp);
  for (auto _ : state) benchmark::DoNotOptimize(sample(fp, t, 1000, 1, {.threads = 1}));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Sample)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_LowerBound(benchmark::State& state) {
  const FactoredProblem fp = factorize(make_problem({.kind = ProblemKind::Example1, .d = state.range(0)}));
  for (auto _ : state) benchmark::DoNotOptimize(lower_bound(fp));
}
BENCHMARK(BM_LowerBound)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
