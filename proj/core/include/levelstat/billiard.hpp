#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "levelstat/level_sequence.hpp"

/// Rectangular flat-cavity spectra (TM_0 modes), the smooth Weyl counting
/// law, and the zero-range point-scatterer perturbation of that spectrum.
///
/// Frequencies are in GHz, lengths in meters.
namespace levelstat::billiard {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct CavityGeometry {
  double length_l1 = 0.365;
  double width_l2 = 0.202;
  double height_d = 0.008;

  double area() const { return length_l1 * width_l2; }
  double perimeter() const { return 2.0 * (length_l1 + width_l2); }
  // Above this frequency modes with a field component along the height exist.
  double cutoff_ghz() const { return kSpeedOfLight / (2.0 * height_d) * 1e-9; }
  void validate() const;
};

/// Smooth counting function N(nu) = a2 nu^2 + a1 nu + a0, nu in GHz.
struct WeylLaw {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  double operator()(double nu) const { return (a2 * nu + a1) * nu + a0; }
  double derivative(double nu) const { return 2.0 * a2 * nu + a1; }
  /// Smallest nu >= 0 with N(nu) = count, assuming the law is increasing there.
  double inverse(double count) const;
};

/// Area, perimeter and corner terms of the Dirichlet rectangle.
WeylLaw weyl_law(const CavityGeometry& geom);

/// N_weyl(nu) for the geometry-derived law. Throws DomainError for nu < 0.
double weyl_counting(const CavityGeometry& geom, double nu_ghz);

struct Mode {
  int m;
  int n;
  double frequency_ghz;
};

/// All Dirichlet modes (m, n >= 1) up to nu_max, sorted by frequency and
/// then by (m, n). No cut-off check; used internally for mode sums.
std::vector<Mode> rectangle_modes(double length_l1, double width_l2, double nu_max_ghz);

/// Eigenfrequencies up to nu_max, ascending, degeneracies kept.
/// Throws DomainError when nu_max exceeds the TM_0 cut-off.
LevelSequence rectangle_eigenfrequencies(const CavityGeometry& geom, double nu_max_ghz);

struct PointScatterer {
  double x = 0.0;  // meters, 0 < x < L1
  double y = 0.0;  // meters, 0 < y < L2
  // Dimensionless coupling; 0 leaves the spectrum unperturbed and larger
  // magnitudes push the levels further from the empty-cavity modes.
  double strength = 0.0;
};

struct ScattererSet {
  std::vector<PointScatterer> scatterers;
};

struct PerturbedSpectrum {
  std::vector<double> levels;     // GHz, ascending, inside the band
  std::vector<double> unperturbed;  // empty-cavity modes inside the band
  // Set when every mode in the band has a node at all scatterers, in which
  // case `levels` equals `unperturbed`.
  bool uncoupled = false;
  std::size_t shifted_roots = 0;

  LevelSequence sequence() const { return LevelSequence(levels, StatKind::Billiard); }
};

/// Eigenfrequencies of the cavity with one or two zero-range scatterers.
///
/// Roots of det[4 pi G_reg(k^2) - diag(1/strength)] are bracketed exactly
/// between consecutive coupled empty-cavity modes and refined by bisection.
/// G_reg is the mode sum of the Dirichlet Green function with the
/// logarithmic coincidence divergence subtracted at a reference wavenumber
/// in the middle of the band. Throws DomainError for an invalid band or
/// scatterer set.
PerturbedSpectrum perturb_point_scatterers(const CavityGeometry& geom, const ScattererSet& scatterers,
                                           std::pair<double, double> band_ghz);

}  // namespace levelstat::billiard
