#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "nph/coxph.hpp"
#include "nph/maxcombo.hpp"
#include "nph/mvn.hpp"
#include "nph/simulate.hpp"
#include "nph/twostep.hpp"
#include "nph/wlrt.hpp"

namespace {

nph::SurvivalSample trial_sample(std::size_t n) {
  nph::TrialDesign design;
  design.n_total = n;
  return nph::simulate_trial(nph::reference_scenario("delay_long"), design, 7).analysis_sample();
}

void BM_LogRank(benchmark::State& state) {
  const auto sample = trial_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nph::weighted_logrank(sample, nph::UnitWeight{}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LogRank)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

void BM_GtTest(benchmark::State& state) {
  const auto sample = trial_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nph::gt_test(sample));
}
BENCHMARK(BM_GtTest)->Arg(400)->Arg(1600);

void BM_MvnTail(benchmark::State& state) {
  const auto k = state.range(0);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(k, k, 0.6);
  corr.diagonal().setOnes();
  for (auto _ : state) benchmark::DoNotOptimize(nph::mvn_tail(2.0, corr, 20000, 1));
}
BENCHMARK(BM_MvnTail)->DenseRange(2, 4);

void BM_MaxCombo(benchmark::State& state) {
  const auto sample = trial_sample(400);
  const auto spec = nph::MaxComboSpec::lin();
  for (auto _ : state) benchmark::DoNotOptimize(nph::maxcombo_test(sample, spec));
}
BENCHMARK(BM_MaxCombo)->Unit(benchmark::kMillisecond);

void BM_PermutationTwoStep(benchmark::State& state) {
  const auto sample = trial_sample(400);
  nph::TwoStepConfig config;
  config.alpha_pre = 0.2;
  config.permutations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nph::permutation_two_step(sample, config));
}
BENCHMARK(BM_PermutationTwoStep)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
