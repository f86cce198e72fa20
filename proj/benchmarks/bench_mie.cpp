#include <benchmark/benchmark.h>

#include <cloakbench/experiments.hpp>
#include <complex>

using namespace cloakbench;
using C = std::complex<double>;

namespace {

mie::LayeredSphere lossy_two_layer(double radius) {
  mie::LayeredSphere s;
  s.shells.push_back({0.4 * radius, C(2.0, 0.5), C(1.0)});
  s.shells.push_back({radius, C(1.5, 0.0), C(1.2)});
  return s;
}

void bm_plane_wave_solve(benchmark::State& state) {
  const auto s = lossy_two_layer(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mie::plane_wave_solve(s, 1.3, PlaneWave{}));
}
BENCHMARK(bm_plane_wave_solve)->Arg(1)->Arg(5)->Arg(20);

void bm_current_solve(benchmark::State& state) {
  const auto s = lossy_two_layer(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mie::current_n1_solve(s, 1.3, CoreBallCurrent{0.3, CVec3{C(1.0), {}, {}}}));
}
BENCHMARK(bm_current_solve);

void bm_far_field_pattern(benchmark::State& state) {
  const auto c = mie::plane_wave_solve(lossy_two_layer(5.0), 1.3, PlaneWave{});
  const auto grid = make_grid(static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mie::far_field_pattern(c, grid));
}
BENCHMARK(bm_far_field_pattern)->Arg(16)->Arg(64);

void bm_riccati_array(benchmark::State& state) {
  const C z(12.0, 7.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::riccati_psi_array(static_cast<int>(state.range(0)), z));
    benchmark::DoNotOptimize(specfun::riccati_xi_array(static_cast<int>(state.range(0)), z));
  }
}
BENCHMARK(bm_riccati_array)->Arg(20)->Arg(100);

void bm_passive_sweep(benchmark::State& state) {
  CloakSpec base;
  base.exps = exponents(0.0, 2.0, 0.0);
  base.eps_core = 2.0;
  SweepOptions opts;
  opts.n_polar = 16;
  opts.n_azimuth = 32;
  opts.threads = static_cast<int>(state.range(0));
  const auto rhos = geometric_grid(0.1, 0.01, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(passive_rate_experiment(base, rhos, PlaneWave{}, opts));
}
BENCHMARK(bm_passive_sweep)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
