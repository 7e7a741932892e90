#include "levelstat/special.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "levelstat/error.hpp"

namespace levelstat {
namespace {

constexpr double kSeriesLimit = 4.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

SiCi sici_series(double x) {
  // Si(x) = sum (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
  // Ci(x) = gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
  const double x2 = x * x;
  double term = x;  // (-1)^k x^(2k+1) / (2k+1)!
  double si_sum = x;
  for (int k = 1; k < 60; ++k) {
    term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
    const double add = term / (2.0 * k + 1.0);
    si_sum += add;
    if (std::abs(add) < kEps * std::abs(si_sum)) break;
  }
  term = 1.0;  // (-1)^k x^(2k) / (2k)!
  double ci_sum = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
    const double add = term / (2.0 * k);
    ci_sum += add;
    if (std::abs(add) < kEps * 1e-2) break;
  }
  const double ci = std::numbers::egamma + std::log(x) + ci_sum;
  return {si_sum - std::numbers::pi / 2.0, ci};
}

// e^{ix} E1(ix) by the modified Lentz evaluation of the continued fraction
// E1(z) = e^{-z} / (z + 1 - 1 / (z + 3 - 4 / (z + 5 - ...))).
std::complex<double> scaled_e1_imaginary(double x) {
  using cd = std::complex<double>;
  constexpr double tiny = 1e-300;
  cd b(1.0, x);
  cd c(1.0 / tiny, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 1; i < 10000; ++i) {
    const double a = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps) return h;
  }
  throw NumericalError("sici continued fraction did not converge at x = " + std::to_string(x));
}

}  // namespace

SiCiAuxiliary sici_auxiliary(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("sici requires finite x > 0");
  if (x <= kSeriesLimit) {
    const SiCi v = sici_series(x);
    const double s = std::sin(x), c = std::cos(x);
    return {v.ci * s - v.si * c, -v.ci * c - v.si * s};
  }
  // E1(ix) = -ci + i si, so e^{ix} E1(ix) = g + i (si cos - ci sin) = g - i f.
  const std::complex<double> h = scaled_e1_imaginary(x);
  return {-h.imag(), h.real()};
}

SiCi sici(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("sici requires finite x > 0");
  if (x <= kSeriesLimit) return sici_series(x);
  const std::complex<double> h = scaled_e1_imaginary(x);
  const std::complex<double> e1 = std::complex<double>(std::cos(x), -std::sin(x)) * h;
  return {e1.imag(), -e1.real()};
}

}  // namespace levelstat
