#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "levelstat/level_sequence.hpp"
#include "levelstat/random.hpp"
#include "levelstat/stats.hpp"

/// Two-port resonance scattering with absorption, the windowed elastic
/// enhancement factor, and its random-matrix predictions.
namespace levelstat::scattering {

using Complex = std::complex<double>;

struct SMatrix {
  Complex aa, ab, ba, bb;
};

struct SMatrixSeries {
  std::vector<double> grid;  // GHz, ascending
  std::vector<SMatrix> entries;
  std::int64_t realization_id = 0;
  // Grid indices where the energy hit a pole and was nudged before solving.
  std::vector<std::size_t> perturbed_points;
};

/// Largest singular value of S and the Frobenius norm of S^dagger S - 1.
double spectral_norm(const SMatrix& s);
double unitarity_defect(const SMatrix& s);

// ---------------------------------------------------------------------------
// Heidelberg model

/// GOE Hamiltonian of the given dimension. Its eigenvalues are unfolded with
/// the semicircle law over the whole spectrum, so the level density is
/// uniform; bulk statistics hold away from both ends.
struct GoeSource {
  std::size_t dim = 400;
};

/// Fixed unit-mean-spacing levels placed on the diagonal. The channel
/// vectors are rotated by an independent random orthogonal matrix in every
/// realization.
struct DiagonalLevels {
  LevelSequence levels;
};

using HamiltonianSource = std::variant<GoeSource, DiagonalLevels>;

/// Weakly coupled absorbing channels with one common transmission
/// t(nu) = transmission * (nu / reference_ghz)^frequency_exponent.
struct ParasiticChannels {
  std::size_t count = 0;
  double transmission = 0.0;
  double frequency_exponent = 0.0;
  double reference_ghz = 10.0;

  double transmission_at(double nu_ghz) const;
  // Sum of the parasitic transmissions at nu.
  double gamma_internal(double nu_ghz) const;
};

/// Energies are in units of the mean level spacing: frequency nu maps to
/// (nu - origin_ghz) * level_density_scale. The coupling vectors have one
/// entry per level and are given in the same units, so a mean squared entry
/// v^2 yields the transmission 4x / (1 + x)^2 with x = pi^2 v^2.
struct HeidelbergModel {
  HamiltonianSource source = GoeSource{};
  std::vector<double> coupling_a;
  std::vector<double> coupling_b;
  ParasiticChannels parasitic;
  double level_density_scale = 1.0;  // levels per GHz
  double origin_ghz = 0.0;

  std::size_t level_count() const;
  void validate() const;
};

/// Squared coupling amplitude giving transmission t on the weak-coupling
/// branch x <= 1. Throws DomainError outside [0, 1].
double coupling_variance_for_transmission(double t);
double transmission_for_coupling_variance(double v2);

/// Model whose two channel vectors are orthogonal, with norms chosen for the
/// transmissions t_a and t_b.
HeidelbergModel make_model(HamiltonianSource source, double t_a, double t_b, const ParasiticChannels& parasitic,
                           double level_density_scale, double origin_ghz);

/// Frequencies covered by the model levels, [origin + e_first / rho, origin + e_last / rho].
/// For GoeSource the unfolded range is [0, dim].
std::pair<double, double> spectral_band(const HeidelbergModel& model);

/// One realization of S(nu) = 1 - 2 pi i W^T (E - H + i pi W W^T)^(-1) W over
/// all physical and parasitic channels, restricted to the two physical
/// ports. It is evaluated as (1 - iK)(1 + iK)^(-1) with the real symmetric
/// K = pi W^T (E - H)^(-1) W in the eigenbasis of H, which keeps S exactly
/// unitary without parasitic channels and symmetric in all cases.
SMatrixSeries simulate_smatrix(const HeidelbergModel& model, std::span<const double> grid_ghz, const RandomSeed& seed);

// ---------------------------------------------------------------------------
// Absorption

struct AbsorptionBudget {
  double t_a = 0.0;
  double t_b = 0.0;
  double gamma_internal = 0.0;
  double gamma_tot = 0.0;
};

AbsorptionBudget total_absorption(double t_a, double t_b, double gamma_internal);

/// As above, and also checks 2 pi width / mean_spacing against the sum.
/// Throws ConsistencyError when they differ by more than rel_tolerance.
AbsorptionBudget total_absorption(double t_a, double t_b, double gamma_internal, double width,
                                  double mean_spacing, double rel_tolerance = 1e-6);

/// Parasitic channels that, together with the physical transmissions,
/// produce gamma_tot_low at nu_low and gamma_tot_high at nu_high with a
/// power law in between.
ParasiticChannels calibrate_parasitic(std::size_t count, double t_a, double t_b, double nu_low_ghz,
                                      double gamma_tot_low, double nu_high_ghz, double gamma_tot_high);

// ---------------------------------------------------------------------------
// Windowed estimates

/// Estimates use contiguous windows of width estimate_window tiling the grid
/// from its first point. Curve points are centred every `step` GHz and
/// average the estimate windows whose centres fall within +-average_window/2.
struct WindowSpec {
  double estimate_window = 0.025;
  double average_window = 0.5;
  double step = 0.5;

  void validate() const;
};

struct WindowTransmission {
  double frequency = 0.0;  // centre, GHz
  double t_a = 0.0;
  double t_b = 0.0;
};

/// T_i = 1 - |<S_ii>|^2 over realization x frequency samples in each curve
/// window. Needs at least 10 realizations on a common grid.
std::vector<WindowTransmission> transmission_coefficients(std::span<const SMatrixSeries> ensemble,
                                                          const WindowSpec& window);

struct EefPoint {
  double frequency = 0.0;
  double gamma_tot = 0.0;
  double f_value = 0.0;
  double std_dev = 0.0;  // spread of the per-window estimates
  double gamma_std = 0.0;  // spread of gamma_tot over the same windows
  double t_a = 0.0;
  double t_b = 0.0;
  std::size_t windows = 0;
};

struct EefCurve {
  std::vector<EefPoint> points;
  std::vector<std::string> diagnostics;
};

/// F = sqrt(var S_aa var S_bb) / var S_ab in each estimate window, with the
/// window mean subtracted and 1/n normalization, then averaged per curve
/// point. gamma_tot is T_a + T_b measured in the curve window plus
/// gamma_internal(nu) at the point when supplied; gamma_std is the spread of
/// that sum over the estimate-window centres. Windows with var S_ab = 0 are skipped
/// and reported in `diagnostics`.
EefCurve eef_estimate(std::span<const SMatrixSeries> ensemble, const WindowSpec& window,
                      const std::function<double(double)>& gamma_internal = {});

// ---------------------------------------------------------------------------
// Theory

/// b2(tau) = 1 - K(tau); the semi-Poisson case uses 2 / (4 + pi^2 tau^2).
double b2_form_factor(stats::FormFactorKind kind, double tau);

/// F = 3 - int_0^inf e^(-s) b2(s / gamma_tot) ds for time-reversal invariant
/// systems, by adaptive quadrature to 1e-10 absolute including the tail bound.
double eef_theory_integral(stats::FormFactorKind kind, double gamma_tot);

/// Closed form of the semi-Poisson integral through si and ci;
/// returns 3 at gamma_tot = 0.
double eef_theory_sp_closed(double gamma_tot);

double eef_theory_goe(double gamma_tot);

}  // namespace levelstat::scattering
