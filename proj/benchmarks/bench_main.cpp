// Microbenchmarks for the hot paths of the Monte Carlo harness.

#include <benchmark/benchmark.h>

#include "subreg/bench.hpp"
#include "subreg/estimators.hpp"
#include "subreg/samplers.hpp"
#include "subreg/variance.hpp"

namespace {

using namespace subreg;

Dataset benchmark_dataset(Index n, Index p, CaseKind kind = CaseKind::kNormal) {
  const SimCase sc{kind, 0.5, p};
  auto xrng = make_stream(17, StreamPurpose::kCovariates);
  Matrix X = gen_covariates(sc, n, xrng);
  const ModelSpec spec(1.0, Vector::Ones(p), 9.0);
  auto erng = make_stream(17, StreamPurpose::kNoise);
  Vector y = gen_response(X, spec, erng);
  return Dataset(std::move(X), std::move(y));
}

void BM_GenCovariates(benchmark::State& state) {
  const SimCase sc{static_cast<CaseKind>(state.range(0)), 0.5, 19};
  const CovariateSampler sampler(sc);
  auto rng = make_stream(1, StreamPurpose::kCovariates);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.sample(100000, rng));
  }
}
BENCHMARK(BM_GenCovariates)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_FullMeans(benchmark::State& state) {
  const Dataset d = benchmark_dataset(100000, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_means(d));
  }
}
BENCHMARK(BM_FullMeans)->Unit(benchmark::kMillisecond);

void BM_OlsFit(benchmark::State& state) {
  const Dataset d = benchmark_dataset(state.range(0), 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ols_with_intercept(d));
  }
}
BENCHMARK(BM_OlsFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_WlsFit(benchmark::State& state) {
  const Dataset d = benchmark_dataset(1000, 19);
  const Vector w = Vector::Constant(1000, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wls_with_intercept(d, w));
  }
}
BENCHMARK(BM_WlsFit)->Unit(benchmark::kMicrosecond);

void BM_LeverageScores(benchmark::State& state) {
  const Dataset d = benchmark_dataset(state.range(0), 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(leverage_scores(d));
  }
}
BENCHMARK(BM_LeverageScores)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_IbossSelect(benchmark::State& state) {
  const Dataset d = benchmark_dataset(100000, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iboss_select(d, 1000));
  }
}
BENCHMARK(BM_IbossSelect)->Unit(benchmark::kMillisecond);

void BM_UniformSample(benchmark::State& state) {
  auto rng = make_stream(2, StreamPurpose::kSampler);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        uniform_sample(100000, 1000, DrawMode::kDeterministic, rng));
  }
}
BENCHMARK(BM_UniformSample)->Unit(benchmark::kMicrosecond);

void BM_ProbabilitySample(benchmark::State& state) {
  const Dataset d = benchmark_dataset(100000, 19);
  const Vector pi = leverage_scores(d) / 20.0;
  auto rng = make_stream(3, StreamPurpose::kSampler);
  for (auto _ : state) {
    benchmark::DoNotOptimize(probability_sample(pi, 1000, rng));
  }
}
BENCHMARK(BM_ProbabilitySample)->Unit(benchmark::kMillisecond);

void BM_SlopeVarianceGap(benchmark::State& state) {
  const Dataset d = benchmark_dataset(500, 8);
  auto rng = make_stream(4, StreamPurpose::kSampler);
  const IndexList idx =
      uniform_sample(500, 50, DrawMode::kDeterministic, rng).idx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(slope_variance_gap(d.X(), idx, 1.0));
  }
}
BENCHMARK(BM_SlopeVarianceGap)->Unit(benchmark::kMicrosecond);

void BM_Replication(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = 100000;
  cfg.p = 19;
  cfg.r = 1000;
  cfg.threads = 1;
  const auto sampler = static_cast<SamplerKind>(state.range(0));
  int rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_replication(cfg, CaseKind::kNormal, sampler, rep++));
  }
}
BENCHMARK(BM_Replication)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
