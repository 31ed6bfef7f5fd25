// Hot paths of the laboratory: spectral solves, ball energies, profiles, and
// one competition solve. Run with --benchmark_filter to isolate a group.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "acf/core.hpp"
#include "acf/functional.hpp"
#include "acf/grid.hpp"
#include "acf/sim.hpp"
#include "acf/spectral.hpp"

namespace {

using namespace acf;

GridSpec plane_grid(int n) {
  GridSpec g;
  g.dim = 2;
  g.h = 2.0 / (n - 1);
  g.origin = {-1.0, -1.0, 0.0};
  g.extents = {n, n, 1};
  return g;
}

void BM_LambdaArc(benchmark::State& state) {
  const AnisotropyMatrix a = make_anisotropy(2, {1.0, 4.0, 1.0});
  const SphericalDomain arc = arc_domain(0.3, 1.2);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lambda_arc(a, arc, n).lambda);
}
BENCHMARK(BM_LambdaArc)->Arg(128)->Arg(512)->Arg(2048);

void BM_SlBandEigen(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sl_band_eigen(0.9, 0.6, n).lambda);
}
BENCHMARK(BM_SlBandEigen)->Arg(512)->Arg(4096);

void BM_Nu2d(benchmark::State& state) {
  const AnisotropyMatrix a = make_anisotropy(2, {1.0, 4.0, 1.0});
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nu_2d(a, n).nu);
}
BENCHMARK(BM_Nu2d)->Unit(benchmark::kMillisecond)->Arg(128)->Arg(256);

void BM_WeightedDirichlet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = plane_grid(n);
  const SampledField u =
      rasterize(g, [](const std::array<double, 3>& x) { return std::max(x[0], 0.0); });
  for (auto _ : state)
    benchmark::DoNotOptimize(weighted_dirichlet(isotropic(2), u, {0, 0, 0}, 0.6, 4.0 * g.h));
}
BENCHMARK(BM_WeightedDirichlet)->Arg(257)->Arg(513);

void BM_AcfProfile(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = plane_grid(n);
  const SampledField u =
      rasterize(g, [](const std::array<double, 3>& x) { return std::max(x[0], 0.0); });
  const SampledField v =
      rasterize(g, [](const std::array<double, 3>& x) { return std::max(-x[0], 0.0); });
  const std::vector<double> radii{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        acf_profile(isotropic(2), u, v, {0, 0, 0}, 4.0, radii, 4.0 * g.h).slope_min);
}
BENCHMARK(BM_AcfProfile)->Unit(benchmark::kMillisecond)->Arg(257);

void BM_HolderSeminorm(benchmark::State& state) {
  const GridSpec g = plane_grid(129);
  const SampledField u = rasterize(g, [](const std::array<double, 3>& x) {
    return std::max(0.0, x[0]) * std::cos(3.0 * x[1]);
  });
  for (auto _ : state) benchmark::DoNotOptimize(holder_seminorm(u, 0.5, 20000, 7));
}
BENCHMARK(BM_HolderSeminorm);

void BM_SolveLv(benchmark::State& state) {
  const SystemSpec spec = default_lv_spec(65);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lv(spec, 100.0).iterations);
}
BENCHMARK(BM_SolveLv)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
