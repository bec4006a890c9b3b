// Serial reference against the OpenMP kernels. Arg 0 is serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>

#include "potlab/blowup/blowup.hpp"
#include "potlab/geometry/domain.hpp"
#include "potlab/potential/riesz.hpp"
#include "potlab/potential/surface_rules.hpp"
#include "potlab/wos/wos.hpp"

using namespace potlab;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

const geometry::ImplicitDomain& halfspace() {
  static const auto d = geometry::make_domain({.kind = "halfspace"});
  return d;
}

void BM_RunWalks(benchmark::State& state) {
  wos::WalkConfig cfg;
  cfg.walks = 20000;
  cfg.exec = exec_of(state);
  const Vec start = make_vec({0, 0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(wos::run_walks(halfspace(), start, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.walks));
}

void BM_RieszDifference(benchmark::State& state) {
  static const auto mu =
      potential::local_surface_rule(halfspace(), zero_vec(3), zero_vec(3), 64.0, potential::RuleOptions{});
  const Vec x = make_vec({0, 0, 1});
  const Vec y = make_vec({0, 0, -1});
  for (auto _ : state) benchmark::DoNotOptimize(potential::riesz_difference(mu, x, y, exec_of(state)));
}

void BM_FirstVariation(benchmark::State& state) {
  const blowup::ScalarField u = [](const Vec& x) { return std::max(x[2], 0.0); };
  const auto phi = blowup::bump_field(make_vec({0.1, -0.05, 0.02}), 0.4, make_vec({0.3, -0.2, 1.0}));
  const geometry::Ball ball{zero_vec(3), 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(blowup::first_variation_residual(u, phi, ball, 0.025, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_RunWalks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RieszDifference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FirstVariation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
