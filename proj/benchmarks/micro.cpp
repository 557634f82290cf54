#include <mgps/gaussian_oracle.hpp>
#include <mgps/metrics.hpp>
#include <mgps/problems.hpp>
#include <mgps/samplers.hpp>

#include <benchmark/benchmark.h>

using namespace mgps;

namespace {

const NoiseSchedule& sched() {
  static const NoiseSchedule s = default_schedule(300);
  return s;
}

GmProblem gm(int d) {
  Rng rng(1);
  return make_gm_problem(d, 1, 0.05, rng);
}

void BM_MixtureDenoiserValue(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GmProblem p = gm(d);
  const MixtureDenoiser den(p.prior, sched());
  Rng rng(2);
  const Vector x = rng.normal_vector(d);
  for (auto _ : state) benchmark::DoNotOptimize(den.value(150, x));
}
BENCHMARK(BM_MixtureDenoiserValue)->Arg(20)->Arg(200);

void BM_MixtureDenoiserVjp(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GmProblem p = gm(d);
  const MixtureDenoiser den(p.prior, sched());
  Rng rng(3);
  const Vector x = rng.normal_vector(d), u = rng.normal_vector(d);
  for (auto _ : state) benchmark::DoNotOptimize(den.vjp(150, x, u));
}
BENCHMARK(BM_MixtureDenoiserVjp)->Arg(20)->Arg(200);

template <class Run>
void chain_bench(benchmark::State& state, Run run) {
  const int d = static_cast<int>(state.range(0));
  const GmProblem p = gm(d);
  const MixtureDenoiser den(p.prior, sched());
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng rng = Rng::substream(4, {i++});
    benchmark::DoNotOptimize(run(den, p.lik, rng).x0);
  }
}

void BM_MgpsChain(benchmark::State& state) {
  const MgpsConfig cfg{midpoint_plan(300, 0.75), GradStepRule{}, AdamOptions{}, std::nullopt, 1};
  chain_bench(state, [&](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
    return mgps_sample(den, lik, cfg, rng);
  });
}
BENCHMARK(BM_MgpsChain)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_DpsChain(benchmark::State& state) {
  chain_bench(state, [](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
    return dps_sample(den, lik, DpsConfig{}, rng);
  });
}
BENCHMARK(BM_DpsChain)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PgdmChain(benchmark::State& state) {
  chain_bench(state, [](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
    return pgdm_sample(den, lik, PgdmConfig{}, rng);
  });
}
BENCHMARK(BM_PgdmChain)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MomentRecursion(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(5);
  const GaussianProblem p = sample_random_instance(d, rng);
  const GaussianOracle oracle(p.prior, p.lik, sched());
  const MidpointPlan plan = midpoint_plan(300, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(oracle.run(plan).mu);
}
BENCHMARK(BM_MomentRecursion)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SlicedWasserstein(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(6);
  Matrix X(1000, d), Y(1000, d);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    X.data()[i] = rng.normal();
    Y.data()[i] = rng.normal();
  }
  const Matrix dirs = random_directions(d, 2000, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sliced_wasserstein_dirs(X, Y, dirs));
}
BENCHMARK(BM_SlicedWasserstein)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
