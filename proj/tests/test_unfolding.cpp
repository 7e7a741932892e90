#include <doctest.h>

#include <cmath>
#include <vector>

#include "levelstat/billiard.hpp"
#include "levelstat/ensembles.hpp"
#include "levelstat/error.hpp"
#include "levelstat/stats.hpp"
#include "levelstat/unfolding.hpp"

using namespace levelstat;
using namespace levelstat::unfolding;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("exact quadratic staircase is recovered") {
  const billiard::WeylLaw law{0.8, 1.5, -0.3};
  std::vector<double> nu;
  for (int i = 1; i <= 200; ++i) nu.push_back(law.inverse(i - 0.5));
  const auto fit = fit_weyl(LevelSequence(nu, StatKind::Ingested));
  CHECK(fit.residual_rms < 1e-10);
  CHECK(fit.law.a2 == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(fit.law.a1 == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(fit.law.a0 == doctest::Approx(-0.3).epsilon(1e-8));
  CHECK_FALSE(fit.used_geometry);
}

TEST_CASE("geometry-pinned fit") {
  const billiard::CavityGeometry g{0.365, 0.202, 0.008};
  const auto seq = billiard::rectangle_eigenfrequencies(g, 18.0);
  const auto fit = fit_weyl(seq, g);
  CHECK(fit.used_geometry);
  CHECK(fit.law.a2 == billiard::weyl_law(g).a2);
  CHECK(fit.law.a1 == doctest::Approx(billiard::weyl_law(g).a1).epsilon(0.15));
}

TEST_CASE("size and rank guards") {
  std::vector<double> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(i);
  CHECK_THROWS_AS(fit_weyl(LevelSequence(ten, StatKind::Ingested)), SizeError);
  // Two distinct values cannot determine a quadratic.
  std::vector<double> two(15, 1.0);
  two.resize(30, 2.0);
  CHECK_THROWS_AS(fit_weyl(LevelSequence(two, StatKind::Billiard)), FitError);
}

TEST_CASE("unfold rescales to unit mean spacing") {
  const auto seq = ensembles::sample_gamma_levels({StatKind::Poisson, 5000, 1.0, 0}, {3, 0});
  const auto u = unfold(seq, fit_weyl(seq).law);
  const auto s = spacings(u);
  CHECK(std::abs(mean(s) - 1.0) < 1e-9);
  CHECK(u.epsilons.front() == doctest::Approx(fit_weyl(seq).law(seq.front())));
  CHECK(u.source == StatKind::Poisson);
}

TEST_CASE("identity law leaves unit-spaced input unchanged") {
  std::vector<double> levels;
  for (int i = 0; i < 50; ++i) levels.push_back(i + 0.25 * std::sin(i));
  levels.back() = 49.0;
  levels.front() = 0.0;
  const auto u = unfold(LevelSequence(levels, StatKind::Ingested), {0.0, 1.0, 0.0});
  for (std::size_t i = 0; i < levels.size(); ++i) CHECK(u.epsilons[i] == doctest::Approx(levels[i]).epsilon(1e-14));
}

TEST_CASE("non-monotone law is rejected") {
  std::vector<double> levels;
  for (int i = 0; i < 30; ++i) levels.push_back(i);
  CHECK_THROWS_AS(unfold(LevelSequence(levels, StatKind::Ingested), {-1.0, 10.0, 0.0}), DomainError);
}

TEST_CASE("unfold is idempotent up to an affine map") {
  const billiard::CavityGeometry g{0.365, 0.202, 0.008};
  const auto seq = billiard::rectangle_eigenfrequencies(g, 15.0);
  const auto once = unfold(seq, fit_weyl(seq).law);
  const LevelSequence again_in(once.epsilons, StatKind::Ingested);
  const auto twice = unfold(again_in, fit_weyl(again_in).law);
  CHECK(std::abs(twice.epsilons[100] - twice.epsilons[0] - (once.epsilons[100] - once.epsilons[0])) < 0.5);
}

TEST_CASE("spacings of higher order") {
  const auto seq = ensembles::sample_gamma_levels({StatKind::SemiPoisson, 400001, 2.0, 0}, {4, 0});
  const auto u = rescale_unit_mean(seq);
  CHECK(mean(spacings(u, 1)) == doctest::Approx(1.0).epsilon(1e-10));
  const auto s2 = spacings(u, 2);
  CHECK(mean(s2) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(s2.size() == u.size() - 2);
  CHECK(stats::gof_distance(s2, stats::theory_integrated_second_nnsd) < 0.005);
  CHECK_THROWS_AS(spacings(UnfoldedSpectrum{{0.0, 1.0}}, 2), SizeError);
}

TEST_CASE("pooling never crosses realizations") {
  const UnfoldedSpectrum a{{0.0, 1.0, 2.0}}, b{{100.0, 101.5, 102.0}};
  const std::vector<UnfoldedSpectrum> both{a, b};
  CHECK(pooled_spacings(both) == std::vector<double>{1.0, 1.0, 1.5, 0.5});
  CHECK(pooled_spacings(both, 2) == std::vector<double>{2.0, 2.0});
}
