#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "mtm/diagnostics.hpp"
#include "mtm/kernel.hpp"

namespace {

using namespace mtm;

Vector random_state(Rng& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = n(rng);
  return x;
}

void BM_Step(benchmark::State& state, ProposalKind kind) {
  KernelConfig config;
  config.target = std::make_shared<BananaTarget>(BananaParams{0.1, 10});
  config.proposal.kind = kind;
  config.proposal.M = static_cast<std::size_t>(state.range(0));
  config.proposal.adapt = false;
  config.weight = {WeightKind::kProportional};
  Kernel kernel(config);
  Rng rng(1);
  Vector x = Vector::Zero(10);
  for (auto _ : state) {
    x = kernel.step(x, rng).next_state;
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Step, hom_full, ProposalKind::kHomFull)->Arg(1)->Arg(5)->Arg(20);
BENCHMARK_CAPTURE(BM_Step, het_full, ProposalKind::kHetFull)->Arg(5)->Arg(20);
BENCHMARK_CAPTURE(BM_Step, hom_cw, ProposalKind::kHomCW)->Arg(1)->Arg(5)->Arg(20);
BENCHMARK_CAPTURE(BM_Step, het_cw, ProposalKind::kHetCW)->Arg(5)->Arg(20);

void BM_LogDensity(benchmark::State& state, std::shared_ptr<const Target> target) {
  Rng rng(2);
  const Vector x = random_state(rng, target->dim()) * 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(target->log_density(x));
}
BENCHMARK_CAPTURE(BM_LogDensity, banana, std::make_shared<BananaTarget>(BananaParams{0.1, 10}));
BENCHMARK_CAPTURE(BM_LogDensity, funnel, std::make_shared<FunnelTarget>(FunnelParams{1.0, 9}));
BENCHMARK_CAPTURE(BM_LogDensity, mixture, std::make_shared<MixtureTarget>(MixtureParams::standard(10)));

void BM_Mess(benchmark::State& state) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix sample(state.range(0), 10);
  for (auto& v : sample.reshaped()) v = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mess(sample));
}
BENCHMARK(BM_Mess)->Arg(10'000)->Arg(100'000);

void BM_KsDistance(benchmark::State& state) {
  const Matrix a = mixture_direct_sample(MixtureParams::standard(2), static_cast<std::size_t>(state.range(0)), 4);
  const Matrix b = mixture_direct_sample(MixtureParams::standard(2), static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(ks_distance(a, b));
}
BENCHMARK(BM_KsDistance)->Arg(100'000);

}  // namespace

BENCHMARK_MAIN();
