#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levelstat/billiard.hpp"
#include "levelstat/level_sequence.hpp"

namespace levelstat::unfolding {

/// Dimensionless levels with unit mean nearest-neighbour spacing.
struct UnfoldedSpectrum {
  std::vector<double> epsilons;
  StatKind source = StatKind::Ingested;

  std::size_t size() const { return epsilons.size(); }
};

struct FitReport {
  billiard::WeylLaw law;
  double residual_rms = 0.0;
  bool used_geometry = false;
};

/// Least-squares fit of N(nu_i) = i - 1/2 to a quadratic. With a geometry the
/// leading coefficient is pinned to A pi / c^2 and only a1, a0 are fitted.
/// Needs at least 20 levels.
FitReport fit_weyl(const LevelSequence& levels, const std::optional<billiard::CavityGeometry>& geometry = std::nullopt);

/// eps_i = law(nu_i), then an affine rescale so that the mean spacing is
/// exactly 1 (first level kept). Throws DomainError when the law is not
/// increasing over the level range.
UnfoldedSpectrum unfold(const LevelSequence& levels, const billiard::WeylLaw& law);

/// Affine rescale of an already unit-density sequence to exact unit mean spacing.
UnfoldedSpectrum rescale_unit_mean(const LevelSequence& levels);

/// eps_{i+q} - eps_i for every valid i.
std::vector<double> spacings(const UnfoldedSpectrum& spectrum, std::size_t order = 1);

/// Spacings computed per realization and concatenated in the given order;
/// no spacing straddles two realizations.
std::vector<double> pooled_spacings(std::span<const UnfoldedSpectrum> realizations, std::size_t order = 1);

}  // namespace levelstat::unfolding
