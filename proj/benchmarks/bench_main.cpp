#include <benchmark/benchmark.h>

#include "dclg/estimator.hpp"
#include "dclg/graph_sim.hpp"
#include "dclg/moments.hpp"

using namespace dclg;

namespace {

ModelFamily family(LifetimeKind law, Side side) {
  ModelFamily f;
  f.law = law;
  f.homogeneous = side;
  return f;
}

ModelFamily family_for(int which) {
  switch (which) {
    case 0: return family(LifetimeKind::Exponential, Side::On);
    case 1: return family(LifetimeKind::Weibull, Side::Off);
    default: return family(LifetimeKind::Pareto, Side::Off);
  }
}

ParamVector truth_for(int which) {
  switch (which) {
    case 0: return {1.0, 3.0, 0.5};
    case 1: return {1.0, 3.0, 1.0};
    default: return {1.0, 3.0, 2.0};
  }
}

// Args: engine (0 skip, 1 event), scheme (0 equidistant, 1 Poisson), K.
void BM_SimulateExp(benchmark::State& state) {
  const auto spec = make_spec(family(LifetimeKind::Exponential, Side::On), {1.0, 3.0, 0.5});
  const auto k = static_cast<std::size_t>(state.range(2));
  const SamplingScheme scheme = state.range(1) == 0 ? SamplingScheme{Equidistant{0.2, k}} : SamplingScheme{PoissonTimes{5.0, k}};
  const Engine engine = state.range(0) == 0 ? Engine::SkipAhead : Engine::EventDriven;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, scheme, seed++, engine));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}
BENCHMARK(BM_SimulateExp)->ArgsProduct({{0, 1}, {0, 1}, {10000}})->Unit(benchmark::kMillisecond);

// Event-driven simulation of the Weibull and Pareto off-time models.
void BM_SimulateHeavy(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  const auto spec = make_spec(family_for(which), truth_for(which));
  const SamplingScheme scheme = PoissonTimes{5.0, 10000};
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, scheme, seed++));
}
BENCHMARK(BM_SimulateHeavy)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

// Arg: 0 exponential (equidistant), 1 Weibull, 2 Pareto (Poisson).
void BM_ModelMoments(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  const auto spec = make_spec(family_for(which), truth_for(which));
  const SamplingScheme scheme = which == 0 ? SamplingScheme{Equidistant{0.2, 10000}} : SamplingScheme{PoissonTimes{5.0, 10000}};
  for (auto _ : state) benchmark::DoNotOptimize(model_moments(spec, scheme));
}
BENCHMARK(BM_ModelMoments)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_SolveMoments(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  const auto f = family_for(which);
  const SamplingScheme scheme = which == 0 ? SamplingScheme{Equidistant{0.2, 10000}} : SamplingScheme{PoissonTimes{5.0, 10000}};
  const auto stats = compute_stats(simulate(make_spec(f, truth_for(which)), scheme, 42));
  for (auto _ : state) benchmark::DoNotOptimize(solve_moments(stats, f, scheme));
}
BENCHMARK(BM_SolveMoments)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ComputeStats(benchmark::State& state) {
  const auto spec = make_spec(family(LifetimeKind::Exponential, Side::On), {1.0, 3.0, 0.5});
  const auto series = simulate(spec, Equidistant{0.2, 100000}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_stats(series));
}
BENCHMARK(BM_ComputeStats)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
