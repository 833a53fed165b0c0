// Serial reference vs OpenMP for the three parallel kernels.
#include <benchmark/benchmark.h>

#include "eqport/statics.hpp"
#include "eqport/verify.hpp"

using namespace eqport;
using Dist = RiskAversionDistribution;

namespace {

const MarketModel& market() {
  static const MarketModel m = MarketModel::constant(0.4, 0.2, 20.0);
  return m;
}

void curve_fill(benchmark::State& state, bool parallel) {
  const PreferenceKernel k(Dist::discrete({1.0, 3.0}, {0.9, 0.1}));
  const TimeGrid g = TimeGrid::uniform(market(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto c = parallel ? solve_unique(k, market(), g) : solve_unique_serial(k, market(), g);
    benchmark::DoNotOptimize(c.v.data());
  }
}

void monte_carlo(benchmark::State& state, bool parallel) {
  const Dist d = Dist::gamma(2.0, 0.5);
  const PreferenceKernel k(d);
  const auto c = solve_unique(k, market(), TimeGrid::uniform(market(), 2000));
  SimConfig sim;
  sim.paths = static_cast<std::size_t>(state.range(0));
  sim.parallel = parallel;
  for (auto _ : state) {
    auto e = mc_objective(c, market(), d, 0.0, sim);
    benchmark::DoNotOptimize(e.value);
  }
}

void sweep(benchmark::State& state, bool parallel) {
  const TwoPointLaw a{1.0, 2.0, 0.9}, b{1.0, 1.0, 0.9};
  const std::vector<double> grid{0.80, 0.83, 0.86, 0.89, 0.92, 0.95};
  for (auto _ : state) {
    auto tr = crossing_sensitivity(a, b, market(), SweepParameter::both_p, grid,
                                   default_config(), parallel);
    benchmark::DoNotOptimize(tr.t_star.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(curve_fill, serial, false)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(curve_fill, openmp, true)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(monte_carlo, serial, false)->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(monte_carlo, openmp, true)->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, openmp, true)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
