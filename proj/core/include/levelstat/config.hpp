#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levelstat/billiard.hpp"
#include "levelstat/scattering.hpp"
#include "levelstat/stats.hpp"

/// Flat `key = value` analysis configuration. Keys carry their unit
/// (`_ghz`, `_m`); '#' starts a comment. Unset keys keep the defaults below.
namespace levelstat::config {

struct AnalysisConfig {
  double band_low_ghz = 8.0;
  double band_high_ghz = 13.5;
  double estimate_window_ghz = 0.025;
  double average_window_ghz = 0.5;
  double window_step_ghz = 0.5;

  // Spacing histograms and the eta fit.
  std::size_t nnsd_bins = 40;
  double nnsd_max_s = 4.0;
  std::size_t p2s_bins = 40;
  double p2s_max_s = 6.0;
  std::string eta_method = "mle";  // mle | histogram
  std::size_t bootstrap_resamples = 200;

  // Where unfold / nnsd / p2s / powerspec take their levels from.
  std::string level_source = "generated";  // generated | billiard | file
  std::string resonance_file;
  std::string resonance_format = "csv";  // csv | plain

  // Synthetic ensembles.
  std::string ensemble_kind = "semi-poisson";  // poisson | semi-poisson | gamma | daisy | goe
  std::size_t ensemble_count = 100000;
  double ensemble_eta = 2.0;
  std::size_t ensemble_realizations = 1;
  std::size_t goe_matrix_dim = 400;

  // Cavity and scatterers; the long side grows by length_step_m per step.
  double cavity_length_m = 0.365;
  double cavity_width_m = 0.202;
  double cavity_height_m = 0.008;
  double length_step_m = 0.002;
  std::size_t length_steps = 25;
  double scatterer_a_x_m = 0.1;
  double scatterer_a_y_m = 0.07;
  double scatterer_b_x_m = 0.27;
  double scatterer_b_y_m = 0.13;
  double scatterer_strength = 100.0;
  bool weyl_use_geometry = false;

  // Power spectrum.
  std::size_t powerspec_n = 512;
  std::size_t powerspec_sequences = 1000;
  double delta_sp = stats::kSemiPoissonDeltaOffset;
  std::size_t calibration_sequences = 20000;

  // Scattering simulation.
  std::string eef_model = "semi-poisson";  // semi-poisson | goe
  std::size_t eef_realizations = 150;
  double eef_grid_step_ghz = 0.001;
  double level_density_per_ghz = 54.0;
  double margin_ghz = 1.0;
  double transmission_a = 0.2;
  double transmission_b = 0.2;
  double gamma_tot_low = 1.5;
  double gamma_tot_high = 4.0;
  std::size_t parasitic_channels = 20;
  std::string sparam_file;
  bool write_sparams = false;

  // Theory curves of F(gamma_tot).
  double gamma_min = 0.01;
  double gamma_max = 100.0;
  std::size_t gamma_points = 200;

  std::uint64_t seed_master = 20240501;
  std::uint64_t seed_stream = 0;
  std::string output_dir = "levelstat-out";

  scattering::WindowSpec windows() const {
    return {estimate_window_ghz, average_window_ghz, window_step_ghz};
  }
  billiard::CavityGeometry geometry(std::size_t step = 0) const {
    return {cavity_length_m + length_step_m * static_cast<double>(step), cavity_width_m, cavity_height_m};
  }
  RandomSeed seed() const { return {seed_master, seed_stream}; }
};

/// Parses and validates. Every unknown key, malformed value and violated
/// constraint is collected and reported together in one ConfigError.
AnalysisConfig parse_config(std::string_view text, const std::string& source = "config");
AnalysisConfig load_config(const std::filesystem::path& path);

/// One message per violated constraint, empty when the config is valid.
std::vector<std::string> violations(const AnalysisConfig& config);

/// Throws ConfigError listing every violated field.
void validate(const AnalysisConfig& config);

/// Every key with its canonical text value, in declaration order.
std::vector<std::pair<std::string, std::string>> entries(const AnalysisConfig& config);
std::string format_config(const AnalysisConfig& config);

}  // namespace levelstat::config
