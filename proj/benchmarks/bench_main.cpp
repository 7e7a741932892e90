#include <benchmark/benchmark.h>

#include <vector>

#include "levelstat/billiard.hpp"
#include "levelstat/ensembles.hpp"
#include "levelstat/scattering.hpp"
#include "levelstat/special.hpp"
#include "levelstat/stats.hpp"
#include "levelstat/unfolding.hpp"

using namespace levelstat;

static void BM_Sici(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(sici(x));
}
BENCHMARK(BM_Sici)->Arg(5)->Arg(35)->Arg(500)->Arg(100000);

static void BM_EefTheoryClosed(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(scattering::eef_theory_sp_closed(2.5));
}
BENCHMARK(BM_EefTheoryClosed);

static void BM_EefTheoryQuadrature(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(scattering::eef_theory_goe(2.5));
}
BENCHMARK(BM_EefTheoryQuadrature);

static void BM_PowerSpectrum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto seq = ensembles::sample_daisy_levels(n + 1, 1, {1, 0});
  const auto delta = stats::delta_series(unfolding::rescale_unit_mean(seq));
  for (auto _ : state) benchmark::DoNotOptimize(stats::power_spectrum(delta));
}
BENCHMARK(BM_PowerSpectrum)->Arg(512)->Arg(4096);

static void BM_FitEta(benchmark::State& state) {
  const auto seq = ensembles::sample_gamma_levels({StatKind::SemiPoisson, 100001, 2.0, 0}, {2, 0});
  const auto s = unfolding::spacings(unfolding::rescale_unit_mean(seq));
  for (auto _ : state) benchmark::DoNotOptimize(stats::fit_eta(s));
}
BENCHMARK(BM_FitEta)->Unit(benchmark::kMillisecond);

static void BM_SimulateSMatrix(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  const auto levels = ensembles::sample_daisy_levels(400, 1, {3, 0});
  const scattering::ParasiticChannels parasitic{channels, 0.05, 0.0, 10.0};
  const auto model = scattering::make_model(scattering::DiagonalLevels{levels}, 0.2, 0.2, parasitic, 1.0, 0.0);
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(100.0 + 0.2 * i);
  for (auto _ : state) benchmark::DoNotOptimize(scattering::simulate_smatrix(model, grid, {3, 1}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SimulateSMatrix)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_PerturbPointScatterers(benchmark::State& state) {
  const billiard::CavityGeometry geom;
  billiard::ScattererSet set{{{0.1, 0.07, 100.0}}};
  if (state.range(0) == 2) set.scatterers.push_back({0.27, 0.13, 100.0});
  for (auto _ : state) benchmark::DoNotOptimize(billiard::perturb_point_scatterers(geom, set, {8.0, 13.5}));
}
BENCHMARK(BM_PerturbPointScatterers)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
