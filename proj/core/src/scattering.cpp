#include "levelstat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "levelstat/ensembles.hpp"
#include "levelstat/error.hpp"
#include "levelstat/quadrature.hpp"
#include "levelstat/special.hpp"

namespace levelstat::scattering {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2cd as_matrix(const SMatrix& s) {
  Eigen::Matrix2cd m;
  m << s.aa, s.ab, s.ba, s.bb;
  return m;
}

void require_transmission(double t, const char* name) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(t));
}

// Level energies and channel vectors of one realization, in the eigenbasis.
struct Realization {
  Eigen::VectorXd energies;
  Eigen::MatrixXd couplings;  // levels x channels, physical channels first
};

Realization draw_realization(const HeidelbergModel& model, Rng& rng) {
  const std::size_t n = model.level_count();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto wa = Eigen::Map<const Eigen::VectorXd>(model.coupling_a.data(), rows);
  const auto wb = Eigen::Map<const Eigen::VectorXd>(model.coupling_b.data(), rows);
  const auto parasitic = static_cast<Eigen::Index>(model.parasitic.count);
  Realization r;
  r.couplings.resize(rows, 2 + parasitic);
  if (const auto* goe = std::get_if<GoeSource>(&model.source)) {
    const Eigen::MatrixXd h = ensembles::sample_goe_matrix(goe->dim, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("GOE eigensolver failed");
    r.energies = solver.eigenvalues().unaryExpr([&](double e) { return ensembles::semicircle_count(e, goe->dim); });
    r.couplings.col(0) = solver.eigenvectors().transpose() * wa;
    r.couplings.col(1) = solver.eigenvectors().transpose() * wb;
  } else {
    const auto& levels = std::get<DiagonalLevels>(model.source).levels;
    r.energies = Eigen::Map<const Eigen::VectorXd>(levels.values().data(), rows);
    // A Haar rotation acting on two vectors only matters through the
    // orthonormal frame it sends them to, so a Gram-Schmidt frame of two
    // Gaussian vectors reproduces it.
    Eigen::VectorXd u1(rows), u2(rows);
    for (Eigen::Index i = 0; i < rows; ++i) u1(i) = rng.normal();
    for (Eigen::Index i = 0; i < rows; ++i) u2(i) = rng.normal();
    u1.normalize();
    u2 -= u1.dot(u2) * u1;
    u2.normalize();
    const double norm_a = wa.norm();
    const double along = wa.dot(wb) / norm_a;
    const double across = std::sqrt(std::max(0.0, wb.squaredNorm() - along * along));
    r.couplings.col(0) = norm_a * u1;
    r.couplings.col(1) = along * u1 + across * u2;
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double nu = model.origin_ghz + r.energies(i) / model.level_density_scale;
    const double t = std::clamp(model.parasitic.transmission_at(std::max(nu, 0.0)), 0.0, 1.0);
    const double amplitude = std::sqrt(coupling_variance_for_transmission(t));
    for (Eigen::Index p = 0; p < parasitic; ++p) r.couplings(i, 2 + p) = amplitude * rng.normal();
  }
  return r;
}

struct CurveWindow {
  double centre;
  double lo;
  double hi;
};

std::vector<CurveWindow> curve_windows(const std::vector<double>& grid, const WindowSpec& window) {
  std::vector<CurveWindow> out;
  const double half = 0.5 * window.average_window;
  for (std::size_t k = 0;; ++k) {
    const double centre = grid.front() + half + window.step * static_cast<double>(k);
    if (centre + half > grid.back() + 1e-9) break;
    out.push_back({centre, centre - half, centre + half});
  }
  if (out.empty()) throw WindowError("grid is shorter than the average window");
  return out;
}

const std::vector<double>& common_grid(std::span<const SMatrixSeries> ensemble) {
  if (ensemble.empty()) throw WindowError("empty ensemble");
  const auto& grid = ensemble.front().grid;
  if (grid.size() < 2) throw WindowError("grid needs at least two frequencies");
  for (const auto& s : ensemble) {
    if (s.grid != grid) throw ConsistencyError("all realizations must share one frequency grid");
    if (s.entries.size() != grid.size()) throw ConsistencyError("entries and grid differ in length");
  }
  return grid;
}

bool in_window(double nu, double lo, double hi) { return nu >= lo - 1e-9 && nu < hi - 1e-9; }

double population_variance(const std::vector<Complex>& values) {
  Complex mean = 0.0;
  for (const auto& v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const auto& v : values) var += std::norm(v - mean);
  return var / static_cast<double>(values.size());
}

std::string describe_window(double lo, double hi) {
  std::ostringstream os;
  os.precision(6);
  os << "[" << lo << ", " << hi << ") GHz";
  return os.str();
}

}  // namespace

double spectral_norm(const SMatrix& s) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(as_matrix(s));
  return svd.singularValues()(0);
}

double unitarity_defect(const SMatrix& s) {
  const Eigen::Matrix2cd m = as_matrix(s);
  return (m.adjoint() * m - Eigen::Matrix2cd::Identity()).norm();
}

double ParasiticChannels::transmission_at(double nu_ghz) const {
  if (frequency_exponent == 0.0) return transmission;
  return transmission * std::pow(nu_ghz / reference_ghz, frequency_exponent);
}

double ParasiticChannels::gamma_internal(double nu_ghz) const {
  return static_cast<double>(count) * transmission_at(nu_ghz);
}

std::size_t HeidelbergModel::level_count() const {
  if (const auto* goe = std::get_if<GoeSource>(&source)) return goe->dim;
  return std::get<DiagonalLevels>(source).levels.size();
}

void HeidelbergModel::validate() const {
  const std::size_t n = level_count();
  if (n < 50) throw SizeError("the Heidelberg model needs at least 50 levels");
  if (coupling_a.size() != n || coupling_b.size() != n)
    throw SizeError("coupling vectors must have one entry per level");
  auto check = [](const std::vector<double>& w, const char* name) {
    double sum = 0.0;
    for (double v : w) {
      if (!std::isfinite(v)) throw DomainError(std::string(name) + " has a non-finite entry");
      sum += v * v;
    }
    if (!(sum > 0.0)) throw DomainError(std::string(name) + " must be nonzero");
  };
  check(coupling_a, "coupling_a");
  check(coupling_b, "coupling_b");
  if (!(level_density_scale > 0.0) || !std::isfinite(level_density_scale))
    throw DomainError("level_density_scale must be positive");
  if (!std::isfinite(origin_ghz)) throw DomainError("origin_ghz must be finite");
  require_transmission(parasitic.transmission, "parasitic transmission");
  if (!std::isfinite(parasitic.frequency_exponent) || !(parasitic.reference_ghz > 0.0))
    throw DomainError("parasitic frequency law needs a finite exponent and a positive reference");
}

double coupling_variance_for_transmission(double t) {
  require_transmission(t, "transmission");
  // Weak branch of t = 4x / (1 + x)^2, written without cancellation at small t.
  const double x = t / (2.0 - t + 2.0 * std::sqrt(1.0 - t));
  return x / (kPi * kPi);
}

double transmission_for_coupling_variance(double v2) {
  if (!(v2 >= 0.0)) throw DomainError("coupling variance must be >= 0");
  const double x = kPi * kPi * v2;
  return 4.0 * x / ((1.0 + x) * (1.0 + x));
}

HeidelbergModel make_model(HamiltonianSource source, double t_a, double t_b, const ParasiticChannels& parasitic,
                           double level_density_scale, double origin_ghz) {
  HeidelbergModel model;
  model.source = std::move(source);
  model.parasitic = parasitic;
  model.level_density_scale = level_density_scale;
  model.origin_ghz = origin_ghz;
  const std::size_t n = model.level_count();
  if (n < 2) throw SizeError("the Heidelberg model needs at least 50 levels");
  const double scale = static_cast<double>(n);
  model.coupling_a.assign(n, 0.0);
  model.coupling_b.assign(n, 0.0);
  model.coupling_a[0] = std::sqrt(scale * coupling_variance_for_transmission(t_a));
  model.coupling_b[1] = std::sqrt(scale * coupling_variance_for_transmission(t_b));
  model.validate();
  return model;
}

std::pair<double, double> spectral_band(const HeidelbergModel& model) {
  double lo = 0.0, hi = 0.0;
  if (const auto* goe = std::get_if<GoeSource>(&model.source)) {
    hi = static_cast<double>(goe->dim);
  } else {
    const auto& levels = std::get<DiagonalLevels>(model.source).levels;
    lo = levels.front();
    hi = levels.back();
  }
  return {model.origin_ghz + lo / model.level_density_scale, model.origin_ghz + hi / model.level_density_scale};
}

SMatrixSeries simulate_smatrix(const HeidelbergModel& model, std::span<const double> grid_ghz, const RandomSeed& seed) {
  model.validate();
  if (grid_ghz.empty()) throw SizeError("empty frequency grid");
  const auto [band_lo, band_hi] = spectral_band(model);
  for (std::size_t i = 0; i < grid_ghz.size(); ++i) {
    if (!(grid_ghz[i] >= band_lo && grid_ghz[i] <= band_hi))
      throw DomainError("grid frequency " + std::to_string(grid_ghz[i]) + " GHz lies outside the model band");
    if (i > 0 && !(grid_ghz[i] > grid_ghz[i - 1])) throw DomainError("grid must be strictly increasing");
  }

  Rng rng(seed);
  const Realization r = draw_realization(model, rng);
  std::vector<double> sorted(r.energies.data(), r.energies.data() + r.energies.size());
  std::sort(sorted.begin(), sorted.end());

  const Eigen::Index channels = r.couplings.cols();
  SMatrixSeries series;
  series.grid.assign(grid_ghz.begin(), grid_ghz.end());
  series.entries.reserve(grid_ghz.size());
  series.realization_id = static_cast<std::int64_t>(seed.stream_id);

  Eigen::MatrixXd weighted(r.couplings.rows(), channels);
  Eigen::MatrixXd k(channels, channels);
  Eigen::MatrixXcd a(channels, channels);
  const Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Identity(channels, 2);
  for (std::size_t g = 0; g < grid_ghz.size(); ++g) {
    double e = (grid_ghz[g] - model.origin_ghz) * model.level_density_scale;
    const double guard = 1e-12 * std::max(1.0, std::abs(e));
    for (int attempt = 0;; ++attempt) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), e - guard);
      if (it == sorted.end() || *it > e + guard) break;
      if (attempt == 8) throw NumericalError("resolvent stays singular near " + std::to_string(grid_ghz[g]) + " GHz");
      e += 1e-9 * std::max(1.0, std::abs(e));
      if (attempt == 0) series.perturbed_points.push_back(g);
    }
    weighted = r.couplings.array().colwise() / (e - r.energies.array());
    k.noalias() = kPi * r.couplings.transpose() * weighted;
    a = Eigen::MatrixXcd::Identity(channels, channels) + Complex(0.0, 1.0) * k.cast<Complex>();
    const Eigen::MatrixXcd x = a.partialPivLu().solve(rhs);
    series.entries.push_back({2.0 * x(0, 0) - 1.0, 2.0 * x(0, 1), 2.0 * x(1, 0), 2.0 * x(1, 1) - 1.0});
  }
  return series;
}

AbsorptionBudget total_absorption(double t_a, double t_b, double gamma_internal) {
  require_transmission(t_a, "t_a");
  require_transmission(t_b, "t_b");
  if (!(gamma_internal >= 0.0) || !std::isfinite(gamma_internal))
    throw DomainError("gamma_internal must be finite and >= 0");
  return {t_a, t_b, gamma_internal, t_a + t_b + gamma_internal};
}

AbsorptionBudget total_absorption(double t_a, double t_b, double gamma_internal, double width, double mean_spacing,
                                  double rel_tolerance) {
  const AbsorptionBudget budget = total_absorption(t_a, t_b, gamma_internal);
  if (!(width >= 0.0) || !std::isfinite(width)) throw DomainError("width must be finite and >= 0");
  if (!(mean_spacing > 0.0) || !std::isfinite(mean_spacing)) throw DomainError("mean spacing must be positive");
  const double from_width = 2.0 * kPi * width / mean_spacing;
  if (std::abs(from_width - budget.gamma_tot) > rel_tolerance * std::max(1.0, budget.gamma_tot))
    throw ConsistencyError("2 pi width / spacing = " + std::to_string(from_width) + " but T_a + T_b + gamma = " +
                           std::to_string(budget.gamma_tot));
  return budget;
}

ParasiticChannels calibrate_parasitic(std::size_t count, double t_a, double t_b, double nu_low_ghz,
                                      double gamma_tot_low, double nu_high_ghz, double gamma_tot_high) {
  if (count == 0) throw SizeError("need at least one parasitic channel");
  if (!(nu_low_ghz > 0.0 && nu_high_ghz > nu_low_ghz)) throw DomainError("need 0 < nu_low < nu_high");
  const double internal_low = gamma_tot_low - t_a - t_b;
  const double internal_high = gamma_tot_high - t_a - t_b;
  if (!(internal_low > 0.0 && internal_high > 0.0))
    throw DomainError("target gamma_tot must exceed the physical transmissions");
  ParasiticChannels p;
  p.count = count;
  p.reference_ghz = nu_low_ghz;
  p.transmission = internal_low / static_cast<double>(count);
  p.frequency_exponent = std::log(internal_high / internal_low) / std::log(nu_high_ghz / nu_low_ghz);
  if (p.transmission_at(nu_high_ghz) > 1.0)
    throw DomainError("too few parasitic channels for the requested absorption");
  return p;
}

void WindowSpec::validate() const {
  if (!(estimate_window > 0.0) || !(average_window > 0.0)) throw DomainError("window widths must be positive");
  if (estimate_window > average_window) throw DomainError("estimate_window must not exceed average_window");
  if (!(step > 0.0)) throw DomainError("window step must be positive");
}

std::vector<WindowTransmission> transmission_coefficients(std::span<const SMatrixSeries> ensemble,
                                                          const WindowSpec& window) {
  window.validate();
  const auto& grid = common_grid(ensemble);
  if (ensemble.size() < 10) throw WindowError("transmission estimates need at least 10 realizations");
  std::vector<WindowTransmission> out;
  for (const auto& w : curve_windows(grid, window)) {
    Complex sum_a = 0.0, sum_b = 0.0;
    std::size_t n = 0;
    for (const auto& series : ensemble)
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!in_window(grid[g], w.lo, w.hi)) continue;
        sum_a += series.entries[g].aa;
        sum_b += series.entries[g].bb;
        ++n;
      }
    if (n == 0) throw WindowError("no samples in window " + describe_window(w.lo, w.hi));
    const double count = static_cast<double>(n);
    out.push_back({w.centre, std::clamp(1.0 - std::norm(sum_a / count), 0.0, 1.0),
                   std::clamp(1.0 - std::norm(sum_b / count), 0.0, 1.0)});
  }
  return out;
}

EefCurve eef_estimate(std::span<const SMatrixSeries> ensemble, const WindowSpec& window,
                      const std::function<double(double)>& gamma_internal) {
  window.validate();
  const auto& grid = common_grid(ensemble);
  const double origin = grid.front();

  // Estimate windows keyed by index, each holding its grid points.
  std::map<long, std::vector<std::size_t>> members;
  for (std::size_t g = 0; g < grid.size(); ++g)
    members[static_cast<long>(std::floor((grid[g] - origin) / window.estimate_window + 1e-9))].push_back(g);

  struct WindowEstimate {
    double centre;
    double f;
  };
  std::vector<WindowEstimate> estimates;
  EefCurve curve;
  std::vector<Complex> aa, ab, bb;
  for (const auto& [index, points] : members) {
    const double lo = origin + window.estimate_window * static_cast<double>(index);
    const double hi = lo + window.estimate_window;
    aa.clear();
    ab.clear();
    bb.clear();
    for (const auto& series : ensemble)
      for (std::size_t g : points) {
        aa.push_back(series.entries[g].aa);
        ab.push_back(series.entries[g].ab);
        bb.push_back(series.entries[g].bb);
      }
    if (aa.size() < 2) throw WindowError("fewer than two samples in window " + describe_window(lo, hi));
    const double var_ab = population_variance(ab);
    double scale = 0.0;
    for (const auto& v : ab) scale = std::max(scale, std::norm(v));
    // A constant S_ab leaves only rounding noise in the variance.
    if (!(var_ab > 1e-24 * scale)) {
      curve.diagnostics.push_back("window " + describe_window(lo, hi) + ": var(S_ab) = 0, skipped");
      continue;
    }
    estimates.push_back({0.5 * (lo + hi), std::sqrt(population_variance(aa) * population_variance(bb)) / var_ab});
  }

  const auto transmissions = ensemble.size() >= 10 ? transmission_coefficients(ensemble, window)
                                                   : std::vector<WindowTransmission>{};
  const auto windows = curve_windows(grid, window);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    std::vector<double> values, centres;
    for (const auto& e : estimates)
      if (in_window(e.centre, windows[w].lo, windows[w].hi)) {
        values.push_back(e.f);
        centres.push_back(e.centre);
      }
    if (values.empty()) {
      curve.diagnostics.push_back("curve point at " + std::to_string(windows[w].centre) + " GHz has no valid window");
      continue;
    }
    EefPoint p;
    p.frequency = windows[w].centre;
    p.windows = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    p.f_value = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - p.f_value) * (v - p.f_value);
      p.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    if (!transmissions.empty()) {
      p.t_a = transmissions[w].t_a;
      p.t_b = transmissions[w].t_b;
    } else {
      curve.diagnostics.push_back("fewer than 10 realizations: transmissions not estimated");
    }
    const double internal = gamma_internal ? gamma_internal(p.frequency) : 0.0;
    p.gamma_tot = total_absorption(p.t_a, p.t_b, internal).gamma_tot;
    if (gamma_internal && centres.size() > 1) {
      std::vector<double> gammas;
      double mean = 0.0;
      for (double c : centres) {
        gammas.push_back(p.t_a + p.t_b + gamma_internal(c));
        mean += gammas.back();
      }
      mean /= static_cast<double>(gammas.size());
      double ss = 0.0;
      for (double g : gammas) ss += (g - mean) * (g - mean);
      p.gamma_std = std::sqrt(ss / static_cast<double>(gammas.size() - 1));
    }
    curve.points.push_back(p);
  }
  return curve;
}

double b2_form_factor(stats::FormFactorKind kind, double tau) {
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
  if (std::isinf(tau)) return 0.0;
  if (kind == stats::FormFactorKind::SemiPoisson) return 2.0 / (4.0 + kPi * kPi * tau * tau);
  return 1.0 - stats::spectral_form_factor(kind, tau);
}

double eef_theory_integral(stats::FormFactorKind kind, double gamma_tot) {
  if (!(gamma_tot > 0.0) || !std::isfinite(gamma_tot)) throw DomainError("gamma_tot must be positive and finite");
  // 0 <= b2 <= 1, so the part beyond s_max is below exp(-s_max).
  constexpr double s_max = 30.0;
  const double tail = std::exp(-s_max);
  std::vector<double> breaks = {1.0, 5.0, 10.0, 20.0};
  for (double f : {1e-2, 1e-1, 1.0, 10.0}) breaks.push_back(f * gamma_tot);
  std::erase_if(breaks, [](double b) { return !(b > 0.0 && b < s_max); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadratureOptions options;
  options.abs_tolerance = 1e-10 - tail;
  const auto result = integrate_adaptive(
      [&](double s) { return std::exp(-s) * b2_form_factor(kind, s / gamma_tot); }, 0.0, s_max, breaks, options);
  return 3.0 - result.value;
}

double eef_theory_sp_closed(double gamma_tot) {
  if (!(gamma_tot >= 0.0) || !std::isfinite(gamma_tot)) throw DomainError("gamma_tot must be finite and >= 0");
  if (gamma_tot == 0.0) return 3.0;
  const double x = 2.0 * gamma_tot / kPi;
  return 3.0 - gamma_tot / kPi * sici_auxiliary(x).f;
}

double eef_theory_goe(double gamma_tot) { return eef_theory_integral(stats::FormFactorKind::GOE, gamma_tot); }

}  // namespace levelstat::scattering
