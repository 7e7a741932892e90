#include "levelstat/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "levelstat/error.hpp"

namespace levelstat::ensembles {

LevelSequence sample_gamma_levels(const EnsembleSpec& spec, const RandomSeed& seed) {
  double eta = spec.eta;
  StatKind kind = spec.kind;
  switch (spec.kind) {
    case StatKind::Poisson: eta = 1.0; break;
    case StatKind::SemiPoisson: eta = 2.0; break;
    case StatKind::GammaEta: break;
    default: throw KindError("sample_gamma_levels accepts Poisson, SemiPoisson or GammaEta, got " + to_string(spec.kind));
  }
  if (!(eta >= 1.0) || !std::isfinite(eta)) throw DomainError("eta must lie in [1, inf), got " + std::to_string(eta));
  if (spec.count < 2) throw SizeError("count must be at least 2");

  Rng rng(seed);
  std::vector<double> levels(spec.count);
  double position = 0.0;
  for (double& level : levels) {
    double spacing = rng.gamma(eta) / eta;
    // A zero spacing would break strict ordering; it has probability ~1e-16.
    while (!(spacing > 0.0)) spacing = rng.gamma(eta) / eta;
    position += spacing;
    level = position;
  }
  return LevelSequence(std::move(levels), kind, eta);
}

LevelSequence daisy_thin(const LevelSequence& poisson, std::size_t order) {
  if (poisson.kind() != StatKind::Poisson) throw KindError("daisy_thin needs a Poisson sequence, got " + to_string(poisson.kind()));
  if (order < 1) throw DomainError("daisy order must be at least 1");
  const std::size_t stride = order + 1;
  const std::size_t out_count = poisson.size() / stride;
  if (out_count < 2) throw SizeError("too few levels to thin");
  const double scale = 1.0 / (static_cast<double>(stride) * poisson.mean_spacing());
  std::vector<double> kept;
  kept.reserve(out_count);
  for (std::size_t i = stride - 1; i < poisson.size(); i += stride) kept.push_back(poisson[i] * scale);
  const double eta = static_cast<double>(stride);
  return LevelSequence(std::move(kept), order == 1 ? StatKind::SemiPoisson : StatKind::GammaEta, eta);
}

LevelSequence sample_daisy_levels(std::size_t count, std::size_t order, const RandomSeed& seed) {
  if (order < 1) throw DomainError("daisy order must be at least 1");
  if (count < 2) throw SizeError("count must be at least 2");
  Rng rng(seed);
  // Generated inline so the nominal unit spacing, not the sample mean, sets the scale.
  std::vector<double> kept;
  kept.reserve(count);
  double position = 0.0;
  const double stride = static_cast<double>(order + 1);
  for (std::size_t i = 0; i < count * (order + 1); ++i) {
    position += rng.exponential();
    if ((i + 1) % (order + 1) == 0) kept.push_back(position / stride);
  }
  return LevelSequence(std::move(kept), order == 1 ? StatKind::SemiPoisson : StatKind::GammaEta, stride);
}

double semicircle_count(double energy, std::size_t dim) {
  const double n = static_cast<double>(dim);
  const double radius = std::sqrt(2.0 * n);
  const double x = std::clamp(energy / radius, -1.0, 1.0);
  return n * (0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / std::numbers::pi);
}

Eigen::MatrixXd sample_goe_matrix(std::size_t dim, Rng& rng) {
  Eigen::MatrixXd h(dim, dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      const double g = rng.normal();
      // (A + A^T)/2: diagonal variance 1, off-diagonal variance 1/2.
      h(i, j) = i == j ? g : g / std::numbers::sqrt2;
      h(j, i) = h(i, j);
    }
  return h;
}

LevelSequence sample_goe_levels(const EnsembleSpec& spec, const RandomSeed& seed) {
  const std::size_t n = spec.matrix_dim;
  if (n < 8) throw SizeError("GOE matrix_dim must be at least 8");
  Rng rng(seed);
  const Eigen::MatrixXd h = sample_goe_matrix(n, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("GOE eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> levels;
  for (std::size_t i = n / 4; i < n / 4 + n / 2; ++i) levels.push_back(semicircle_count(ev(static_cast<Eigen::Index>(i)), n));
  return LevelSequence(std::move(levels), StatKind::GOE);
}

}  // namespace levelstat::ensembles
