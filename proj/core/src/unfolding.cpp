#include "levelstat/unfolding.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "levelstat/error.hpp"

namespace levelstat::unfolding {

FitReport fit_weyl(const LevelSequence& levels, const std::optional<billiard::CavityGeometry>& geometry) {
  const std::size_t n = levels.size();
  if (n < 20) throw SizeError("fit_weyl needs at least 20 levels, got " + std::to_string(n));

  // Centre and scale the abscissa for conditioning: nu = mid + half * t.
  const double mid = 0.5 * (levels.front() + levels.back());
  const double half = 0.5 * (levels.back() - levels.front());
  if (!(half > 0.0)) throw FitError("all levels are equal; the Weyl fit is rank deficient");

  FitReport report;
  report.used_geometry = geometry.has_value();
  const double pinned_a2 = geometry ? billiard::weyl_law(*geometry).a2 : 0.0;
  const int columns = geometry ? 2 : 3;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), columns);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double t = (levels[i] - mid) / half;
    design(r, 0) = 1.0;
    design(r, 1) = t;
    if (!geometry) design(r, 2) = t * t;
    target(r) = static_cast<double>(i) + 0.5 - pinned_a2 * levels[i] * levels[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < columns) throw FitError("Weyl design matrix is rank deficient");
  const Eigen::VectorXd c = qr.solve(target);

  // Back to polynomial coefficients in nu.
  const double c2 = geometry ? 0.0 : c(2) / (half * half);
  const double c1 = c(1) / half;
  report.law.a2 = geometry ? pinned_a2 : c2;
  report.law.a1 = c1 - 2.0 * c2 * mid;
  report.law.a0 = c(0) - c1 * mid + c2 * mid * mid;
  const Eigen::VectorXd residual = design * c - target;
  report.residual_rms = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
  return report;
}

namespace {

UnfoldedSpectrum rescale(std::vector<double> eps, StatKind source) {
  const double span = eps.back() - eps.front();
  if (!(span > 0.0)) throw DomainError("unfolded levels do not span a positive range");
  const double factor = static_cast<double>(eps.size() - 1) / span;
  const double first = eps.front();
  for (double& e : eps) e = first + (e - first) * factor;
  return {std::move(eps), source};
}

}  // namespace

UnfoldedSpectrum unfold(const LevelSequence& levels, const billiard::WeylLaw& law) {
  // The derivative is linear in nu, so checking both ends covers the range.
  if (!(law.derivative(levels.front()) > 0.0 && law.derivative(levels.back()) > 0.0))
    throw DomainError("Weyl law is not increasing over the level range");
  std::vector<double> eps;
  eps.reserve(levels.size());
  for (double nu : levels.levels()) eps.push_back(law(nu));
  return rescale(std::move(eps), levels.kind());
}

UnfoldedSpectrum rescale_unit_mean(const LevelSequence& levels) {
  return rescale(levels.values(), levels.kind());
}

std::vector<double> spacings(const UnfoldedSpectrum& spectrum, std::size_t order) {
  if (order < 1) throw DomainError("spacing order must be positive");
  if (order >= spectrum.size())
    throw SizeError("spacing order " + std::to_string(order) + " needs more than " + std::to_string(spectrum.size()) + " levels");
  std::vector<double> out(spectrum.size() - order);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum.epsilons[i + order] - spectrum.epsilons[i];
  return out;
}

std::vector<double> pooled_spacings(std::span<const UnfoldedSpectrum> realizations, std::size_t order) {
  std::vector<double> pooled;
  for (const auto& r : realizations) {
    const auto s = spacings(r, order);
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  return pooled;
}

}  // namespace levelstat::unfolding
