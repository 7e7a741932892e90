#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "levelstat/level_sequence.hpp"
#include "levelstat/random.hpp"

/// Seedable generators of synthetic level sequences used as Monte Carlo
/// references: gamma-family (Poisson, semi-Poisson and general eta), the
/// daisy decimation of a Poisson sequence, and GOE bulk spectra.
namespace levelstat::ensembles {

struct EnsembleSpec {
  StatKind kind = StatKind::SemiPoisson;
  std::size_t count = 1000;
  double eta = 2.0;             // GammaEta only
  std::size_t matrix_dim = 200;  // GOE only
};

/// Cumulative sums of independent spacings with density
/// eta^eta s^(eta-1) exp(-eta s) / Gamma(eta); unit mean spacing in
/// expectation. Poisson forces eta = 1 and SemiPoisson forces eta = 2.
LevelSequence sample_gamma_levels(const EnsembleSpec& spec, const RandomSeed& seed);

/// Keeps every (order + 1)-th level of a Poisson sequence and rescales to
/// unit mean spacing. order = 1 yields semi-Poisson statistics.
LevelSequence daisy_thin(const LevelSequence& poisson, std::size_t order);

/// Convenience: a Poisson sequence of (order + 1) * count levels, thinned.
LevelSequence sample_daisy_levels(std::size_t count, std::size_t order, const RandomSeed& seed);

/// Bulk eigenvalues of one GOE matrix (central half of the spectrum),
/// unfolded with the semicircle cumulative so the mean spacing is 1.
/// Returns matrix_dim / 2 levels; `spec.count` is not used.
LevelSequence sample_goe_levels(const EnsembleSpec& spec, const RandomSeed& seed);

/// Dense GOE matrix (A + A^T) / 2 with standard normal A, filled column by
/// column from the upper triangle.
Eigen::MatrixXd sample_goe_matrix(std::size_t dim, Rng& rng);

/// Smooth semicircle counting function for the GOE normalization used here
/// (off-diagonal variance 1/2, radius sqrt(2 n)).
double semicircle_count(double energy, std::size_t dim);

}  // namespace levelstat::ensembles
