#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levelstat/error.hpp"
#include "levelstat/special.hpp"
#include "oracles.hpp"

using levelstat::sici;
using levelstat::test::sici_oracle;

TEST_CASE("sici at x = 1 against reference values") {
  const auto r = sici(1.0);
  CHECK(r.si == doctest::Approx(0.946083070367183 - std::numbers::pi / 2).epsilon(1e-14));
  CHECK(r.ci == doctest::Approx(0.337403922900968).epsilon(1e-14));
}

TEST_CASE("sici matches the high-precision oracle on (0, 50]") {
  double worst = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double x = std::pow(10.0, -6.0 + 7.69897 * i / 600.0);
    if (x > 50.0) break;
    const auto got = sici(x);
    const auto want = sici_oracle(x);
    worst = std::max({worst, std::abs(got.si - want.si), std::abs(got.ci - want.ci)});
  }
  // Around the series / continued fraction switch.
  for (double x = 3.9; x <= 4.1; x += 0.001) {
    const auto got = sici(x);
    const auto want = sici_oracle(x);
    worst = std::max({worst, std::abs(got.si - want.si), std::abs(got.ci - want.ci)});
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("sici matches the asymptotic oracle on (50, 1e4]") {
  double worst = 0.0;
  for (int i = 1; i <= 300; ++i) {
    const double x = 50.0 * std::pow(200.0, i / 300.0);
    const auto got = sici(x);
    const auto want = sici_oracle(x);
    worst = std::max({worst, std::abs(got.si - want.si), std::abs(got.ci - want.ci)});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("sici derivatives match finite differences") {
  const double h = 1e-5;
  for (double x = 0.5; x <= 50.0; x += 0.25) {
    const auto p = sici(x + h), m = sici(x - h);
    CHECK(std::abs((p.si - m.si) / (2 * h) - std::sin(x) / x) < 1e-6);
    CHECK(std::abs((p.ci - m.ci) / (2 * h) - std::cos(x) / x) < 1e-6);
  }
}

TEST_CASE("sici limits and domain") {
  CHECK(sici(1e-12).si == doctest::Approx(-std::numbers::pi / 2).epsilon(1e-11));
  const auto far = sici(1e4);
  CHECK(std::abs(far.si) < 2e-4);
  CHECK(std::abs(far.ci) < 2e-4);
  CHECK_THROWS_AS(sici(0.0), levelstat::DomainError);
  CHECK_THROWS_AS(sici(-1.0), levelstat::DomainError);
}

TEST_CASE("auxiliary functions agree with the definitions") {
  for (double x : {0.1, 1.0, 3.99, 4.01, 10.0, 100.0}) {
    const auto s = sici(x);
    const auto a = levelstat::sici_auxiliary(x);
    CHECK(a.f == doctest::Approx(s.ci * std::sin(x) - s.si * std::cos(x)).epsilon(1e-10));
    CHECK(a.g == doctest::Approx(-s.ci * std::cos(x) - s.si * std::sin(x)).epsilon(1e-10));
  }
  // f ~ 1/x for large x.
  CHECK(levelstat::sici_auxiliary(1e6).f == doctest::Approx(1e-6).epsilon(1e-10));
}
