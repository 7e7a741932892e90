#include "levelstat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "levelstat/error.hpp"
#include "levelstat/io.hpp"

namespace levelstat::config {
namespace {

using Member = std::variant<double AnalysisConfig::*, std::size_t AnalysisConfig::*, std::string AnalysisConfig::*,
                            bool AnalysisConfig::*>;

struct Field {
  const char* key;
  Member member;
};

#define LEVELSTAT_FIELD(name) Field{#name, &AnalysisConfig::name}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      LEVELSTAT_FIELD(band_low_ghz),
      LEVELSTAT_FIELD(band_high_ghz),
      LEVELSTAT_FIELD(estimate_window_ghz),
      LEVELSTAT_FIELD(average_window_ghz),
      LEVELSTAT_FIELD(window_step_ghz),
      LEVELSTAT_FIELD(nnsd_bins),
      LEVELSTAT_FIELD(nnsd_max_s),
      LEVELSTAT_FIELD(p2s_bins),
      LEVELSTAT_FIELD(p2s_max_s),
      LEVELSTAT_FIELD(eta_method),
      LEVELSTAT_FIELD(bootstrap_resamples),
      LEVELSTAT_FIELD(level_source),
      LEVELSTAT_FIELD(resonance_file),
      LEVELSTAT_FIELD(resonance_format),
      LEVELSTAT_FIELD(ensemble_kind),
      LEVELSTAT_FIELD(ensemble_count),
      LEVELSTAT_FIELD(ensemble_eta),
      LEVELSTAT_FIELD(ensemble_realizations),
      LEVELSTAT_FIELD(goe_matrix_dim),
      LEVELSTAT_FIELD(cavity_length_m),
      LEVELSTAT_FIELD(cavity_width_m),
      LEVELSTAT_FIELD(cavity_height_m),
      LEVELSTAT_FIELD(length_step_m),
      LEVELSTAT_FIELD(length_steps),
      LEVELSTAT_FIELD(scatterer_a_x_m),
      LEVELSTAT_FIELD(scatterer_a_y_m),
      LEVELSTAT_FIELD(scatterer_b_x_m),
      LEVELSTAT_FIELD(scatterer_b_y_m),
      LEVELSTAT_FIELD(scatterer_strength),
      LEVELSTAT_FIELD(weyl_use_geometry),
      LEVELSTAT_FIELD(powerspec_n),
      LEVELSTAT_FIELD(powerspec_sequences),
      LEVELSTAT_FIELD(delta_sp),
      LEVELSTAT_FIELD(calibration_sequences),
      LEVELSTAT_FIELD(eef_model),
      LEVELSTAT_FIELD(eef_realizations),
      LEVELSTAT_FIELD(eef_grid_step_ghz),
      LEVELSTAT_FIELD(level_density_per_ghz),
      LEVELSTAT_FIELD(margin_ghz),
      LEVELSTAT_FIELD(transmission_a),
      LEVELSTAT_FIELD(transmission_b),
      LEVELSTAT_FIELD(gamma_tot_low),
      LEVELSTAT_FIELD(gamma_tot_high),
      LEVELSTAT_FIELD(parasitic_channels),
      LEVELSTAT_FIELD(sparam_file),
      LEVELSTAT_FIELD(write_sparams),
      LEVELSTAT_FIELD(gamma_min),
      LEVELSTAT_FIELD(gamma_max),
      LEVELSTAT_FIELD(gamma_points),
      LEVELSTAT_FIELD(seed_master),
      LEVELSTAT_FIELD(seed_stream),
      LEVELSTAT_FIELD(output_dir),
  };
  return table;
}

#undef LEVELSTAT_FIELD

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Returns an error message, or an empty string on success.
std::string assign(AnalysisConfig& config, const Member& member, std::string_view value) {
  return std::visit(
      [&](auto ptr) -> std::string {
        using T = std::remove_reference_t<decltype(config.*ptr)>;
        if constexpr (std::is_same_v<T, double>) {
          try {
            config.*ptr = io::parse_double(value, "", 0);
          } catch (const ParseError&) {
            return "expected a number, got '" + std::string(value) + "'";
          }
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          std::size_t v = 0;
          const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (value.empty() || ec != std::errc() || p != value.data() + value.size())
            return "expected a non-negative integer, got '" + std::string(value) + "'";
          config.*ptr = v;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true") config.*ptr = true;
          else if (value == "false") config.*ptr = false;
          else return "expected true or false, got '" + std::string(value) + "'";
        } else {
          config.*ptr = std::string(value);
        }
        return {};
      },
      member);
}

std::string render(const AnalysisConfig& config, const Member& member) {
  return std::visit(
      [&](auto ptr) -> std::string {
        using T = std::remove_cvref_t<decltype(config.*ptr)>;
        if constexpr (std::is_same_v<T, double>) return io::format_double(config.*ptr);
        else if constexpr (std::is_same_v<T, std::size_t>) return std::to_string(config.*ptr);
        else if constexpr (std::is_same_v<T, bool>) return config.*ptr ? "true" : "false";
        else return config.*ptr;
      },
      member);
}

void check_one_of(std::vector<std::string>& issues, const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : " | ") + std::string(a);
  issues.push_back(key + ": must be one of " + list + ", got '" + value + "'");
}

std::string join(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& i : issues) out += "\n  " + i;
  return out;
}

}  // namespace

std::vector<std::string> violations(const AnalysisConfig& c) {
  std::vector<std::string> v;
  auto positive = [&](const char* key, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string(key) + ": must be positive");
  };
  auto at_least = [&](const char* key, std::size_t x, std::size_t min) {
    if (x < min) v.push_back(std::string(key) + ": must be at least " + std::to_string(min));
  };
  auto unit = [&](const char* key, double x) {
    if (!(x >= 0.0 && x <= 1.0)) v.push_back(std::string(key) + ": must lie in [0, 1]");
  };
  positive("band_low_ghz", c.band_low_ghz);
  positive("band_high_ghz", c.band_high_ghz);
  if (!(c.band_low_ghz < c.band_high_ghz)) v.push_back("band_low_ghz: must be below band_high_ghz");
  positive("estimate_window_ghz", c.estimate_window_ghz);
  positive("average_window_ghz", c.average_window_ghz);
  positive("window_step_ghz", c.window_step_ghz);
  if (c.estimate_window_ghz > c.average_window_ghz)
    v.push_back("estimate_window_ghz: must not exceed average_window_ghz");
  at_least("nnsd_bins", c.nnsd_bins, 1);
  positive("nnsd_max_s", c.nnsd_max_s);
  at_least("p2s_bins", c.p2s_bins, 1);
  positive("p2s_max_s", c.p2s_max_s);
  check_one_of(v, "eta_method", c.eta_method, {"mle", "histogram"});
  check_one_of(v, "level_source", c.level_source, {"generated", "billiard", "file"});
  if (c.level_source == "file" && c.resonance_file.empty())
    v.push_back("resonance_file: required when level_source = file");
  check_one_of(v, "resonance_format", c.resonance_format, {"csv", "plain"});
  check_one_of(v, "ensemble_kind", c.ensemble_kind, {"poisson", "semi-poisson", "gamma", "daisy", "goe"});
  at_least("ensemble_count", c.ensemble_count, 2);
  if (!(c.ensemble_eta >= 1.0) || !std::isfinite(c.ensemble_eta)) v.push_back("ensemble_eta: must be >= 1");
  at_least("ensemble_realizations", c.ensemble_realizations, 1);
  at_least("goe_matrix_dim", c.goe_matrix_dim, 50);
  positive("cavity_length_m", c.cavity_length_m);
  positive("cavity_width_m", c.cavity_width_m);
  positive("cavity_height_m", c.cavity_height_m);
  if (!(c.length_step_m >= 0.0)) v.push_back("length_step_m: must be >= 0");
  auto inside = [&](const char* key, double x, double length) {
    if (!(x > 0.0 && x < length)) v.push_back(std::string(key) + ": must lie strictly inside the cavity");
  };
  inside("scatterer_a_x_m", c.scatterer_a_x_m, c.cavity_length_m);
  inside("scatterer_a_y_m", c.scatterer_a_y_m, c.cavity_width_m);
  inside("scatterer_b_x_m", c.scatterer_b_x_m, c.cavity_length_m);
  inside("scatterer_b_y_m", c.scatterer_b_y_m, c.cavity_width_m);
  if (!std::isfinite(c.scatterer_strength)) v.push_back("scatterer_strength: must be finite");
  at_least("powerspec_n", c.powerspec_n, 8);
  at_least("powerspec_sequences", c.powerspec_sequences, 1);
  if (!std::isfinite(c.delta_sp)) v.push_back("delta_sp: must be finite");
  at_least("calibration_sequences", c.calibration_sequences, 1);
  check_one_of(v, "eef_model", c.eef_model, {"semi-poisson", "goe"});
  at_least("eef_realizations", c.eef_realizations, 10);
  positive("eef_grid_step_ghz", c.eef_grid_step_ghz);
  if (c.eef_grid_step_ghz > c.estimate_window_ghz / 2.0)
    v.push_back("eef_grid_step_ghz: must give at least two samples per estimate window");
  positive("level_density_per_ghz", c.level_density_per_ghz);
  if (!(c.margin_ghz >= 0.0)) v.push_back("margin_ghz: must be >= 0");
  unit("transmission_a", c.transmission_a);
  unit("transmission_b", c.transmission_b);
  if (!(c.transmission_a > 0.0)) v.push_back("transmission_a: must be positive");
  if (!(c.transmission_b > 0.0)) v.push_back("transmission_b: must be positive");
  if (!(c.gamma_tot_low > c.transmission_a + c.transmission_b))
    v.push_back("gamma_tot_low: must exceed transmission_a + transmission_b");
  if (!(c.gamma_tot_high > c.transmission_a + c.transmission_b))
    v.push_back("gamma_tot_high: must exceed transmission_a + transmission_b");
  at_least("parasitic_channels", c.parasitic_channels, 1);
  positive("gamma_min", c.gamma_min);
  if (!(c.gamma_max > c.gamma_min)) v.push_back("gamma_max: must exceed gamma_min");
  at_least("gamma_points", c.gamma_points, 2);
  if (c.output_dir.empty()) v.push_back("output_dir: must not be empty");
  return v;
}

void validate(const AnalysisConfig& config) {
  const auto issues = violations(config);
  if (!issues.empty()) throw ConfigError(std::to_string(issues.size()) + " invalid field(s):" + join(issues));
}

AnalysisConfig parse_config(std::string_view text, const std::string& source) {
  AnalysisConfig config;
  std::vector<std::string> issues;
  std::set<std::string, std::less<>> seen;
  std::size_t number = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++number;
    const auto where = source + ":" + std::to_string(number) + ": ";
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back(where + "expected key = value");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) {
      issues.push_back(where + "unknown key '" + std::string(key) + "'");
      continue;
    }
    if (!seen.insert(std::string(key)).second) {
      issues.push_back(where + std::string(key) + ": given twice");
      continue;
    }
    if (auto error = assign(config, it->member, value); !error.empty())
      issues.push_back(where + std::string(key) + ": " + error);
  }
  for (auto& v : violations(config)) issues.push_back(source + ": " + v);
  if (!issues.empty()) throw ConfigError(std::to_string(issues.size()) + " invalid field(s):" + join(issues));
  return config;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> entries(const AnalysisConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, render(config, f.member));
  return out;
}

std::string format_config(const AnalysisConfig& config) {
  std::string out;
  for (const auto& [key, value] : entries(config)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace levelstat::config
