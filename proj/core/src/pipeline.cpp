#include "levelstat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

#include "levelstat/billiard.hpp"
#include "levelstat/ensembles.hpp"
#include "levelstat/error.hpp"
#include "levelstat/io.hpp"
#include "levelstat/parallel.hpp"
#include "levelstat/scattering.hpp"
#include "levelstat/stats.hpp"
#include "levelstat/unfolding.hpp"

namespace levelstat::pipeline {
namespace {

using config::AnalysisConfig;

// Child streams of the configured seed, one per consumer.
constexpr std::uint64_t kGenerateStream = 1;
constexpr std::uint64_t kPowerSemiPoissonStream = 2;
constexpr std::uint64_t kPowerPoissonStream = 3;
constexpr std::uint64_t kScatteringStream = 4;
constexpr std::uint64_t kCalibrationStream = 5;
constexpr std::uint64_t kBootstrapStream = 6;

constexpr std::size_t kCurvePoints = 201;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto out = linspace(std::log(lo), std::log(hi), n);
  for (double& v : out) v = std::exp(v);
  out.front() = lo;
  out.back() = hi;
  return out;
}

Table curve(std::string name, std::string description, Provenance provenance, std::string operation,
            std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.description = std::move(description);
  t.provenance = provenance;
  t.operation = std::move(operation);
  t.columns = std::move(columns);
  return t;
}

Table sampled(std::string name, std::string description, std::string operation, const std::vector<double>& xs,
              const std::function<double(double)>& f, std::vector<std::string> columns) {
  Table t = curve(std::move(name), std::move(description), Provenance::Theory, std::move(operation), std::move(columns));
  for (double x : xs) t.rows.push_back({x, f(x)});
  return t;
}

struct Levels {
  std::vector<LevelSequence> raw;
  std::vector<unfolding::UnfoldedSpectrum> unfolded;
  std::vector<unfolding::FitReport> fits;  // empty for synthetic levels
  Provenance provenance = Provenance::MonteCarlo;
  std::optional<RandomSeed> seed;
  std::string origin;
};

LevelSequence generate_one(const AnalysisConfig& c, const RandomSeed& seed) {
  using ensembles::EnsembleSpec;
  if (c.ensemble_kind == "poisson") return ensembles::sample_gamma_levels({StatKind::Poisson, c.ensemble_count, 1.0, 0}, seed);
  if (c.ensemble_kind == "semi-poisson")
    return ensembles::sample_gamma_levels({StatKind::SemiPoisson, c.ensemble_count, 2.0, 0}, seed);
  if (c.ensemble_kind == "gamma")
    return ensembles::sample_gamma_levels({StatKind::GammaEta, c.ensemble_count, c.ensemble_eta, 0}, seed);
  if (c.ensemble_kind == "daisy") return ensembles::sample_daisy_levels(c.ensemble_count, 1, seed);
  return ensembles::sample_goe_levels({StatKind::GOE, 0, 0.0, c.goe_matrix_dim}, seed);
}

std::vector<billiard::PerturbedSpectrum> billiard_spectra(const AnalysisConfig& c) {
  std::vector<billiard::PerturbedSpectrum> out(c.length_steps + 1);
  billiard::ScattererSet set{{{c.scatterer_a_x_m, c.scatterer_a_y_m, c.scatterer_strength},
                              {c.scatterer_b_x_m, c.scatterer_b_y_m, c.scatterer_strength}}};
  parallel_for(out.size(), [&](std::size_t step) {
    out[step] = billiard::perturb_point_scatterers(c.geometry(step), set, {c.band_low_ghz, c.band_high_ghz});
  });
  return out;
}

void fit_and_unfold(Levels& levels, const std::function<std::optional<billiard::CavityGeometry>(std::size_t)>& geometry) {
  for (std::size_t i = 0; i < levels.raw.size(); ++i) {
    levels.fits.push_back(unfolding::fit_weyl(levels.raw[i], geometry(i)));
    levels.unfolded.push_back(unfolding::unfold(levels.raw[i], levels.fits.back().law));
  }
}

Levels acquire_levels(const AnalysisConfig& c) {
  Levels levels;
  if (c.level_source == "generated") {
    const RandomSeed seed = c.seed().child(kGenerateStream);
    levels.seed = seed;
    levels.origin = "generated:" + c.ensemble_kind;
    levels.raw.reserve(c.ensemble_realizations);
    for (std::size_t r = 0; r < c.ensemble_realizations; ++r) levels.raw.push_back(generate_one(c, seed.child(r)));
    for (const auto& s : levels.raw) levels.unfolded.push_back(unfolding::rescale_unit_mean(s));
    return levels;
  }
  if (c.level_source == "billiard") {
    levels.provenance = Provenance::Model;
    levels.origin = "billiard";
    for (const auto& s : billiard_spectra(c)) levels.raw.push_back(s.sequence());
    fit_and_unfold(levels, [&](std::size_t step) {
      return c.weyl_use_geometry ? std::optional(c.geometry(step)) : std::nullopt;
    });
    return levels;
  }
  levels.provenance = Provenance::Estimate;
  levels.origin = "file:" + c.resonance_file;
  const auto table = io::ingest_resonances(
      c.resonance_file, c.resonance_format == "plain" ? io::ResonanceFormat::Plain : io::ResonanceFormat::Csv);
  for (auto id : table.realizations()) levels.raw.push_back(table.sequence(id));
  fit_and_unfold(levels, [&](std::size_t) {
    return c.weyl_use_geometry ? std::optional(c.geometry(0)) : std::nullopt;
  });
  return levels;
}

Table histogram_table(std::string name, std::string description, std::string operation,
                      const stats::SpacingHistogram& h) {
  Table t = curve(std::move(name), std::move(description), Provenance::Estimate, std::move(operation), {"s", "density"});
  for (std::size_t j = 0; j < h.densities.size(); ++j)
    t.rows.push_back({0.5 * (h.bin_edges[j] + h.bin_edges[j + 1]), h.densities[j]});
  return t;
}

Table empirical_cdf(std::string name, std::string description, std::vector<double> sample,
                    const std::vector<double>& xs) {
  std::sort(sample.begin(), sample.end());
  Table t = curve(std::move(name), std::move(description), Provenance::Estimate, "integrated spacing distribution",
                  {"s", "integrated"});
  for (double x : xs) {
    const auto below = std::upper_bound(sample.begin(), sample.end(), x) - sample.begin();
    t.rows.push_back({x, static_cast<double>(below) / static_cast<double>(sample.size())});
  }
  return t;
}

void tag_levels(Table& t, const Levels& levels) {
  t.seed = levels.seed;
  t.description += " (levels: " + levels.origin + ")";
}

// ---------------------------------------------------------------------------
// Subcommands

void run_generate(const AnalysisConfig& c, PlotBundle& b) {
  AnalysisConfig generated = c;
  generated.level_source = "generated";
  const Levels levels = acquire_levels(generated);
  Table t = curve("levels", "synthetic level sequences", Provenance::MonteCarlo, "sample " + c.ensemble_kind,
                  {"realization_id", "level"});
  t.seed = levels.seed;
  for (std::size_t r = 0; r < levels.raw.size(); ++r)
    for (double v : levels.raw[r].levels()) t.rows.push_back({static_cast<double>(r), v});
  b.tables.push_back(std::move(t));
  double spacing = 0.0;
  for (const auto& s : levels.raw) spacing += s.mean_spacing();
  b.results.emplace_back("generate.mean_spacing", spacing / static_cast<double>(levels.raw.size()));
}

void run_billiard(const AnalysisConfig& c, PlotBundle& b) {
  const auto spectra = billiard_spectra(c);
  Table levels = curve("billiard_levels", "cavity eigenfrequencies with two point scatterers per length step",
                       Provenance::Model, "perturb point scatterers", {"realization_id", "frequency_ghz"});
  Table empty = curve("billiard_unperturbed", "empty-cavity eigenfrequencies per length step", Provenance::Model,
                      "rectangle eigenfrequencies", {"realization_id", "frequency_ghz"});
  std::size_t shifted = 0;
  for (std::size_t step = 0; step < spectra.size(); ++step) {
    for (double f : spectra[step].levels) levels.rows.push_back({static_cast<double>(step), f});
    for (double f : spectra[step].unperturbed) empty.rows.push_back({static_cast<double>(step), f});
    shifted += spectra[step].shifted_roots;
  }
  const auto geom = c.geometry(0);
  const auto law = billiard::weyl_law(geom);
  const auto modes = billiard::rectangle_modes(geom.length_l1, geom.width_l2, c.band_high_ghz);
  Table staircase = curve("weyl_staircase", "exact mode count against the Weyl law, first length step",
                          Provenance::Theory, "weyl counting", {"frequency_ghz", "count_exact", "count_weyl"});
  for (double nu : linspace(0.0, c.band_high_ghz, kCurvePoints)) {
    const auto exact = std::count_if(modes.begin(), modes.end(), [&](const billiard::Mode& m) { return m.frequency_ghz <= nu; });
    staircase.rows.push_back({nu, static_cast<double>(exact), law(nu)});
  }
  b.tables.push_back(std::move(levels));
  b.tables.push_back(std::move(empty));
  b.tables.push_back(std::move(staircase));
  b.results.emplace_back("billiard.configurations", static_cast<double>(spectra.size()));
  b.results.emplace_back("billiard.shifted_roots", static_cast<double>(shifted));
  b.results.emplace_back("billiard.weyl_a2", law.a2);
  b.results.emplace_back("billiard.weyl_a1", law.a1);
  b.results.emplace_back("billiard.cutoff_ghz", geom.cutoff_ghz());
}

void run_unfold(const AnalysisConfig& c, PlotBundle& b) {
  const Levels levels = acquire_levels(c);
  Table t = curve("unfolded", "unfolded levels", levels.provenance, "unfold", {"realization_id", "epsilon"});
  tag_levels(t, levels);
  for (std::size_t r = 0; r < levels.unfolded.size(); ++r)
    for (double e : levels.unfolded[r].epsilons) t.rows.push_back({static_cast<double>(r), e});
  b.tables.push_back(std::move(t));
  if (!levels.fits.empty()) {
    Table fits = curve("weyl_fit", "fitted smooth counting function per realization", Provenance::Estimate, "fit weyl",
                       {"realization_id", "a2", "a1", "a0", "residual_rms"});
    for (std::size_t r = 0; r < levels.fits.size(); ++r) {
      const auto& f = levels.fits[r];
      fits.rows.push_back({static_cast<double>(r), f.law.a2, f.law.a1, f.law.a0, f.residual_rms});
    }
    b.tables.push_back(std::move(fits));
  }
  b.notes.emplace_back("unfold.levels", levels.origin);
}

stats::EtaFitOptions eta_options(const AnalysisConfig& c) {
  stats::EtaFitOptions o;
  o.method = c.eta_method == "histogram" ? stats::EtaMethod::HistogramLeastSquares : stats::EtaMethod::MaximumLikelihood;
  o.bins = c.nnsd_bins;
  o.max_s = c.nnsd_max_s;
  o.bootstrap_resamples = c.bootstrap_resamples;
  o.bootstrap_seed = c.seed().child(kBootstrapStream);
  return o;
}

void reference_curves(PlotBundle& b, const std::string& prefix, double max_s) {
  const auto xs = linspace(0.0, max_s, kCurvePoints);
  using stats::SpacingLaw;
  b.tables.push_back(sampled(prefix + "_poisson", "Poisson spacing density", "theory nnsd", xs,
                             [](double s) { return stats::theory_nnsd(SpacingLaw::poisson(), s); }, {"s", "density"}));
  b.tables.push_back(sampled(prefix + "_semi_poisson", "semi-Poisson spacing density", "theory nnsd", xs,
                             [](double s) { return stats::theory_nnsd(SpacingLaw::semi_poisson(), s); }, {"s", "density"}));
  b.tables.push_back(sampled(prefix + "_goe", "GOE spacing density (Wigner surmise)", "theory nnsd", xs,
                             [](double s) { return stats::theory_nnsd(SpacingLaw::goe(), s); }, {"s", "density"}));
}

void run_nnsd(const AnalysisConfig& c, PlotBundle& b) {
  const Levels levels = acquire_levels(c);
  const auto spacings = unfolding::pooled_spacings(levels.unfolded, 1);
  Table hist = histogram_table("nnsd_histogram", "nearest-neighbour spacing histogram", "spacing histogram",
                               stats::make_histogram(spacings, c.nnsd_bins, 0.0, c.nnsd_max_s));
  tag_levels(hist, levels);
  b.tables.push_back(std::move(hist));
  reference_curves(b, "nnsd", c.nnsd_max_s);

  const auto fit = stats::fit_eta(spacings, eta_options(c));
  const auto xs = linspace(0.0, c.nnsd_max_s, kCurvePoints);
  const auto law = stats::SpacingLaw::gamma(fit.eta);
  b.tables.push_back(sampled("nnsd_gamma_fit", "fitted gamma-family spacing density", "fit eta", xs,
                             [&](double s) { return stats::theory_nnsd(law, s); }, {"s", "density"}));
  Table integrated = empirical_cdf("integrated_nnsd", "integrated spacing distribution", spacings, xs);
  tag_levels(integrated, levels);
  b.tables.push_back(std::move(integrated));
  b.tables.push_back(sampled("integrated_nnsd_semi_poisson", "semi-Poisson integrated spacing distribution",
                             "theory integrated nnsd", xs,
                             [](double s) { return stats::theory_integrated_nnsd(stats::SpacingLaw::semi_poisson(), s); },
                             {"s", "integrated"}));
  b.results.emplace_back("nnsd.spacings", static_cast<double>(spacings.size()));
  b.results.emplace_back("nnsd.eta", fit.eta);
  b.results.emplace_back("nnsd.eta_std_error", fit.std_error);
  b.results.emplace_back("nnsd.ks_semi_poisson", stats::gof_distance(spacings, [](double s) {
    return stats::theory_integrated_nnsd(stats::SpacingLaw::semi_poisson(), s);
  }));
  b.results.emplace_back("nnsd.ks_poisson", stats::gof_distance(spacings, [](double s) {
    return stats::theory_integrated_nnsd(stats::SpacingLaw::poisson(), s);
  }));
  b.notes.emplace_back("nnsd.eta_method", stats::to_string(fit.method));
}

void run_p2s(const AnalysisConfig& c, PlotBundle& b) {
  const Levels levels = acquire_levels(c);
  const auto spacings = unfolding::pooled_spacings(levels.unfolded, 2);
  Table hist = histogram_table("p2s_histogram", "second nearest-neighbour spacing histogram", "spacing histogram order 2",
                               stats::make_histogram(spacings, c.p2s_bins, 0.0, c.p2s_max_s));
  tag_levels(hist, levels);
  b.tables.push_back(std::move(hist));
  const auto xs = linspace(0.0, c.p2s_max_s, kCurvePoints);
  b.tables.push_back(sampled("p2s_semi_poisson", "semi-Poisson second nearest-neighbour density", "theory p2s", xs,
                             [](double s) { return stats::theory_second_nnsd(s); }, {"s", "density"}));
  reference_curves(b, "p2s_reference", c.p2s_max_s);
  b.results.emplace_back("p2s.spacings", static_cast<double>(spacings.size()));
  b.results.emplace_back("p2s.ks_semi_poisson",
                         stats::gof_distance(spacings, [](double s) { return stats::theory_integrated_second_nnsd(s); }));
}

Table spectrum_table(std::string name, std::string description, Provenance provenance,
                     const stats::PowerSpectrumEstimate& est) {
  Table t = curve(std::move(name), std::move(description), provenance, "power spectrum", {"k", "s_k"});
  for (std::size_t k = 1; k < est.n; ++k) t.rows.push_back({static_cast<double>(k), est.at(k)});
  return t;
}

Table theory_spectrum(std::string name, stats::FormFactorKind kind, std::size_t n, double delta) {
  Table t = curve(std::move(name), "power spectrum theory (" + stats::to_string(kind) + ")", Provenance::Theory,
                  "theory power spectrum", {"k", "s_k"});
  for (std::size_t k = 1; k < n; ++k) t.rows.push_back({static_cast<double>(k), stats::theory_power_spectrum(kind, k, n, delta)});
  return t;
}

double small_k_mean(const stats::PowerSpectrumEstimate& est) {
  const std::size_t k_max = std::max<std::size_t>(1, est.n / 64);
  double sum = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) sum += est.at(k);
  return sum / static_cast<double>(k_max);
}

void run_powerspec(const AnalysisConfig& c, PlotBundle& b) {
  using stats::FormFactorKind;
  if (c.level_source == "generated") {
    const std::size_t n = c.powerspec_n;
    const RandomSeed sp_seed = c.seed().child(kPowerSemiPoissonStream);
    const RandomSeed poisson_seed = c.seed().child(kPowerPoissonStream);
    const auto sp = stats::ensemble_power_spectrum(FormFactorKind::SemiPoisson, n, c.powerspec_sequences, sp_seed);
    const auto poisson = stats::ensemble_power_spectrum(FormFactorKind::Poisson, n, c.powerspec_sequences, poisson_seed);
    Table t1 = spectrum_table("powerspec_semi_poisson", "mean power spectrum of daisy sequences", Provenance::MonteCarlo, sp);
    t1.seed = sp_seed;
    Table t2 = spectrum_table("powerspec_poisson", "mean power spectrum of Poisson sequences", Provenance::MonteCarlo, poisson);
    t2.seed = poisson_seed;
    b.tables.push_back(std::move(t1));
    b.tables.push_back(std::move(t2));
    b.results.emplace_back("powerspec.relative_rms_semi_poisson",
                           stats::relative_rms_deviation(sp, FormFactorKind::SemiPoisson, c.delta_sp, 1, n / 4));
    b.results.emplace_back("powerspec.relative_rms_poisson",
                           stats::relative_rms_deviation(poisson, FormFactorKind::Poisson, stats::kPoissonDeltaOffset, 1, n / 4));
    b.results.emplace_back("powerspec.small_k_ratio", small_k_mean(sp) / small_k_mean(poisson));
  } else {
    const Levels levels = acquire_levels(c);
    std::size_t n = SIZE_MAX;
    for (const auto& u : levels.unfolded) n = std::min(n, u.size() - 1);
    if (n < 8) throw SizeError("power spectrum needs at least 9 levels per realization");
    std::vector<stats::PowerSpectrumEstimate> spectra;
    for (const auto& u : levels.unfolded) {
      std::vector<double> head(u.epsilons.begin(), u.epsilons.begin() + static_cast<std::ptrdiff_t>(n + 1));
      const LevelSequence seq(std::move(head), StatKind::Ingested);
      spectra.push_back(stats::power_spectrum(stats::delta_series(unfolding::rescale_unit_mean(seq))));
    }
    const auto mean = stats::average_power_spectra(spectra);
    Table t = spectrum_table("powerspec_estimate", "mean power spectrum", Provenance::Estimate, mean);
    tag_levels(t, levels);
    b.tables.push_back(std::move(t));
    b.results.emplace_back("powerspec.relative_rms_semi_poisson",
                           stats::relative_rms_deviation(mean, FormFactorKind::SemiPoisson, c.delta_sp, 1, std::max<std::size_t>(1, n / 4)));
  }
  const std::size_t n = b.tables.back().rows.size() + 1;
  b.tables.push_back(theory_spectrum("powerspec_theory_semi_poisson", FormFactorKind::SemiPoisson, n, c.delta_sp));
  b.tables.push_back(theory_spectrum("powerspec_theory_poisson", FormFactorKind::Poisson, n, stats::kPoissonDeltaOffset));
  b.tables.push_back(theory_spectrum("powerspec_theory_goe", FormFactorKind::GOE, n, stats::kGaussianDeltaOffset));
  b.results.emplace_back("powerspec.n", static_cast<double>(n));
  b.results.emplace_back("powerspec.delta_semi_poisson", c.delta_sp);
}

void run_eef_theory(const AnalysisConfig& c, PlotBundle& b) {
  const auto gammas = logspace(c.gamma_min, c.gamma_max, c.gamma_points);
  b.tables.push_back(sampled("eef_semi_poisson", "semi-Poisson enhancement factor, closed form", "eef theory closed form",
                             gammas, scattering::eef_theory_sp_closed, {"gamma_tot", "f"}));
  b.tables.push_back(sampled("eef_semi_poisson_quadrature", "semi-Poisson enhancement factor, quadrature",
                             "eef theory integral", gammas,
                             [](double g) { return scattering::eef_theory_integral(stats::FormFactorKind::SemiPoisson, g); },
                             {"gamma_tot", "f"}));
  b.tables.push_back(sampled("eef_goe", "GOE enhancement factor", "eef theory integral", gammas,
                             scattering::eef_theory_goe, {"gamma_tot", "f"}));
  b.tables.push_back(sampled("eef_poisson", "Poisson enhancement factor", "eef theory integral", gammas,
                             [](double g) { return scattering::eef_theory_integral(stats::FormFactorKind::Poisson, g); },
                             {"gamma_tot", "f"}));
  b.results.emplace_back("eef_theory.semi_poisson_at_gamma_min", scattering::eef_theory_sp_closed(c.gamma_min));
  b.results.emplace_back("eef_theory.semi_poisson_at_gamma_max", scattering::eef_theory_sp_closed(c.gamma_max));
}

std::vector<double> frequency_grid(const AnalysisConfig& c) {
  const auto count = static_cast<std::size_t>(std::floor((c.band_high_ghz - c.band_low_ghz) / c.eef_grid_step_ghz + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = c.band_low_ghz + c.eef_grid_step_ghz * static_cast<double>(i);
  return grid;
}

std::vector<scattering::SMatrixSeries> simulate_ensemble(const AnalysisConfig& c,
                                                         const scattering::ParasiticChannels& parasitic,
                                                         const RandomSeed& seed) {
  const auto grid = frequency_grid(c);
  const double rho = c.level_density_per_ghz;
  std::vector<scattering::SMatrixSeries> series(c.eef_realizations);
  if (c.eef_model == "goe") {
    const double span = (c.band_high_ghz - c.band_low_ghz) * rho;
    if (span > 0.5 * static_cast<double>(c.goe_matrix_dim))
      throw ConfigError("goe_matrix_dim: the band must fit in the central half of the GOE spectrum");
    const double origin = 0.5 * (c.band_low_ghz + c.band_high_ghz) - 0.5 * static_cast<double>(c.goe_matrix_dim) / rho;
    const auto model = scattering::make_model(scattering::GoeSource{c.goe_matrix_dim}, c.transmission_a,
                                              c.transmission_b, parasitic, rho, origin);
    parallel_for(series.size(), [&](std::size_t r) { series[r] = scattering::simulate_smatrix(model, grid, seed.child(r)); });
    return series;
  }
  const double origin = c.band_low_ghz - c.margin_ghz;
  const auto count = static_cast<std::size_t>(std::ceil((c.band_high_ghz - c.band_low_ghz + 2.0 * c.margin_ghz) * rho)) + 1;
  parallel_for(series.size(), [&](std::size_t r) {
    const RandomSeed stream = seed.child(r);
    auto levels = ensembles::sample_daisy_levels(count, 1, stream.child(0));
    const auto model = scattering::make_model(scattering::DiagonalLevels{std::move(levels)}, c.transmission_a,
                                              c.transmission_b, parasitic, rho, origin);
    series[r] = scattering::simulate_smatrix(model, grid, stream.child(1));
    series[r].realization_id = static_cast<std::int64_t>(r);
  });
  return series;
}

void run_eef_sim(const AnalysisConfig& c, PlotBundle& b) {
  const auto parasitic = scattering::calibrate_parasitic(c.parasitic_channels, c.transmission_a, c.transmission_b,
                                                         c.band_low_ghz, c.gamma_tot_low, c.band_high_ghz,
                                                         c.gamma_tot_high);
  const RandomSeed seed = c.seed().child(kScatteringStream);
  std::vector<scattering::SMatrixSeries> series;
  Provenance provenance = Provenance::MonteCarlo;
  if (!c.sparam_file.empty()) {
    series = io::ingest_sparams(c.sparam_file).series();
    provenance = Provenance::Estimate;
    b.notes.emplace_back("eef_sim.sparams", c.sparam_file);
  } else {
    series = simulate_ensemble(c, parasitic, seed);
    if (c.write_sparams) b.files.emplace_back("sparams.csv", io::format_sparams(io::sparam_table(series)));
  }
  const auto windows = c.windows();
  const auto estimate = scattering::eef_estimate(series, windows, [&](double nu) { return parasitic.gamma_internal(nu); });
  for (const auto& d : estimate.diagnostics) b.diagnostics.push_back("eef_sim: " + d);

  const bool goe = c.eef_model == "goe";
  const std::function<double(double)> theory = goe ? std::function<double(double)>(scattering::eef_theory_goe)
                                                   : std::function<double(double)>(scattering::eef_theory_sp_closed);
  Table points = curve("eef_curve", "windowed elastic enhancement factor", provenance, "eef estimate",
                       {"frequency_ghz", "gamma_tot", "f", "std_dev", "gamma_std"});
  Table transmissions = curve("eef_transmissions", "windowed transmission coefficients", provenance,
                              "transmission coefficients", {"frequency_ghz", "t_a", "t_b"});
  Table theory_points = curve("eef_theory_at_points", goe ? "GOE theory at the measured gamma_tot"
                                                          : "semi-Poisson closed form at the measured gamma_tot",
                              Provenance::Theory, "eef theory", {"frequency_ghz", "gamma_tot", "f"});
  if (provenance == Provenance::MonteCarlo) {
    points.seed = seed;
    transmissions.seed = seed;
  }
  std::size_t within = 0;
  for (const auto& p : estimate.points) {
    points.rows.push_back({p.frequency, p.gamma_tot, p.f_value, p.std_dev, p.gamma_std});
    transmissions.rows.push_back({p.frequency, p.t_a, p.t_b});
    const double f_th = theory(p.gamma_tot);
    theory_points.rows.push_back({p.frequency, p.gamma_tot, f_th});
    const double h = 1e-4 * p.gamma_tot;
    const double slope = (theory(p.gamma_tot + h) - theory(p.gamma_tot - h)) / (2.0 * h);
    const double sigma = std::hypot(p.std_dev, slope * p.gamma_std);
    if (std::abs(p.f_value - f_th) <= 2.0 * sigma) ++within;
  }
  b.tables.push_back(std::move(points));
  b.tables.push_back(std::move(transmissions));
  b.tables.push_back(std::move(theory_points));
  b.results.emplace_back("eef_sim.realizations", static_cast<double>(series.size()));
  b.results.emplace_back("eef_sim.points", static_cast<double>(estimate.points.size()));
  b.results.emplace_back("eef_sim.within_two_sigma_fraction",
                         estimate.points.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(estimate.points.size()));
  b.results.emplace_back("eef_sim.parasitic_transmission", parasitic.transmission);
  b.results.emplace_back("eef_sim.parasitic_exponent", parasitic.frequency_exponent);
  b.notes.emplace_back("eef_sim.model", c.eef_model);
}

void run_calibrate_delta(const AnalysisConfig& c, PlotBundle& b) {
  const RandomSeed seed = c.seed().child(kCalibrationStream);
  const auto cal = stats::calibrate_semi_poisson_delta(c.powerspec_n, c.calibration_sequences, seed);
  const auto spectrum = stats::ensemble_power_spectrum(stats::FormFactorKind::SemiPoisson, c.powerspec_n,
                                                       c.calibration_sequences, seed);
  Table t = curve("calibration_spectrum", "daisy power spectrum used to calibrate the semi-Poisson offset",
                  Provenance::MonteCarlo, "calibrate semi-Poisson offset", {"k", "s_k", "theory"});
  t.seed = seed;
  for (std::size_t k = 1; k < spectrum.n; ++k)
    t.rows.push_back({static_cast<double>(k), spectrum.at(k),
                      stats::theory_power_spectrum(stats::FormFactorKind::SemiPoisson, k, spectrum.n, cal.delta)});
  b.tables.push_back(std::move(t));
  b.results.emplace_back("calibrate.delta", cal.delta);
  b.results.emplace_back("calibrate.relative_rms", cal.relative_rms);
  b.results.emplace_back("calibrate.n", static_cast<double>(cal.n));
  b.results.emplace_back("calibrate.sequences", static_cast<double>(cal.sequences));
}

using Runner = void (*)(const AnalysisConfig&, PlotBundle&);

const std::map<std::string, std::vector<Runner>, std::less<>>& registry() {
  static const std::map<std::string, std::vector<Runner>, std::less<>> table = {
      {"generate", {run_generate}},
      {"billiard", {run_billiard}},
      {"unfold", {run_unfold}},
      {"nnsd", {run_nnsd}},
      {"p2s", {run_p2s}},
      {"powerspec", {run_powerspec}},
      {"eef-sim", {run_eef_sim}},
      {"eef-theory", {run_eef_theory}},
      {"calibrate-delta", {run_calibrate_delta}},
      {"full-report",
       {run_generate, run_billiard, run_unfold, run_nnsd, run_p2s, run_powerspec, run_eef_theory, run_eef_sim}},
  };
  return table;
}

nlohmann::ordered_json seed_json(const RandomSeed& s) {
  return {{"master", s.master}, {"stream", s.stream_id}};
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Estimate: return "estimate";
    case Provenance::Theory: return "theory";
    case Provenance::MonteCarlo: return "monte-carlo";
    case Provenance::Model: return "model";
  }
  return "unknown";
}

const Table& PlotBundle::table(std::string_view name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw DataError("no table named " + std::string(name));
}

double PlotBundle::result(std::string_view name) const {
  for (const auto& [key, value] : results)
    if (key == name) return value;
  throw DataError("no result named " + std::string(name));
}

std::string PlotBundle::format_table(const Table& table) {
  std::string out = "#";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : " ") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + io::format_double(row[i]);
    out += "\n";
  }
  return out;
}

std::string PlotBundle::manifest_json() const {
  nlohmann::ordered_json m;
  m["tool"] = "levelstat";
  m["subcommand"] = subcommand;
  m["seed"] = seed_json(seed);
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  m["config"] = cfg;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& t : tables) {
    nlohmann::ordered_json e;
    e["name"] = t.name;
    e["file"] = t.name + ".csv";
    e["description"] = t.description;
    e["provenance"] = to_string(t.provenance);
    e["operation"] = t.operation;
    e["columns"] = t.columns;
    e["rows"] = t.rows.size();
    e["seed"] = t.seed ? seed_json(*t.seed) : nlohmann::ordered_json(nullptr);
    list.push_back(e);
  }
  m["tables"] = list;
  nlohmann::ordered_json extra = nlohmann::ordered_json::array();
  for (const auto& f : files) extra.push_back(f.first);
  m["files"] = extra;
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  for (const auto& [key, value] : results) res[key] = value;
  m["results"] = res;
  nlohmann::ordered_json notes_json = nlohmann::ordered_json::object();
  for (const auto& [key, value] : notes) notes_json[key] = value;
  m["notes"] = notes_json;
  m["diagnostics"] = diagnostics;
  return m.dump(2) + "\n";
}

void PlotBundle::write(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& t : tables) io::write_atomic(dir / (t.name + ".csv"), format_table(t));
  for (const auto& [name, content] : files) io::write_atomic(dir / name, content);
  io::write_atomic(dir / "manifest.json", manifest_json());
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, runners] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

PlotBundle run_pipeline(const config::AnalysisConfig& config, std::string_view subcommand) {
  const auto it = registry().find(subcommand);
  if (it == registry().end()) throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");
  config::validate(config);
  PlotBundle bundle;
  bundle.subcommand = std::string(subcommand);
  bundle.seed = config.seed();
  bundle.config = config::entries(config);
  for (Runner run : it->second) run(config, bundle);
  std::map<std::string, int> seen;
  for (const auto& t : bundle.tables)
    if (++seen[t.name] > 1) throw ConsistencyError("duplicate table name " + t.name);
  return bundle;
}

}  // namespace levelstat::pipeline
