#pragma once

#include <algorithm>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "levelstat/billiard.hpp"
#include "levelstat/special.hpp"

namespace levelstat::test {

// Si/Ci reference in 100-digit arithmetic: Taylor series up to x = 50,
// asymptotic auxiliary series (truncated at the smallest term) beyond.
inline SiCi sici_oracle(double xd) {
  using Big = boost::multiprecision::cpp_bin_float_100;
  const Big x = xd;
  const Big pi = boost::multiprecision::acos(Big(-1));
  if (xd <= 50.0) {
    Big si = 0, ci = 0;
    Big term = x;  // x^(2k+1) / (2k+1)!
    for (int k = 0; k < 400; ++k) {
      const Big add = term / (2 * k + 1);
      si += (k % 2 == 0) ? add : Big(-add);
      term *= x * x / ((2 * k + 2) * (2 * k + 3));
      if (add < Big("1e-80") && k > 10) break;
    }
    Big cterm = x * x / 2;  // x^(2k) / (2k)!
    for (int k = 1; k < 400; ++k) {
      const Big add = cterm / (2 * k);
      ci += (k % 2 == 1) ? Big(-add) : add;
      cterm *= x * x / ((2 * k + 1) * (2 * k + 2));
      if (add < Big("1e-80") && k > 10) break;
    }
    const Big euler("0.57721566490153286060651209008240243104215933593992359880576723488486772677766467");
    ci += euler + boost::multiprecision::log(x);
    return {static_cast<double>(si - pi / 2), static_cast<double>(ci)};
  }
  Big f = 0, g = 0;
  Big tf = 1 / x, tg = 1 / (x * x);
  for (int k = 0; k < 200; ++k) {
    f += tf;
    g += tg;
    const Big nf = -tf * (2 * k + 1) * (2 * k + 2) / (x * x);
    const Big ng = -tg * (2 * k + 2) * (2 * k + 3) / (x * x);
    if (abs(nf) > abs(tf) || abs(nf) < Big("1e-60")) break;
    tf = nf;
    tg = ng;
  }
  const Big c = boost::multiprecision::cos(x), s = boost::multiprecision::sin(x);
  return {static_cast<double>(-f * c - g * s), static_cast<double>(f * s - g * c)};
}

// Fraction of shifted roots that sit alone in an open interval between
// consecutive distinct empty-cavity levels.
inline double interlacing_fraction(const billiard::PerturbedSpectrum& p) {
  std::vector<double> u = p.unperturbed;
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<int> per_gap(u.size() + 1, 0);
  std::vector<std::size_t> gap_of;
  for (double x : p.levels) {
    if (std::binary_search(u.begin(), u.end(), x)) continue;
    const auto gap = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), x) - u.begin());
    ++per_gap[gap];
    gap_of.push_back(gap);
  }
  if (gap_of.empty()) return 1.0;
  std::size_t good = 0;
  for (std::size_t g : gap_of)
    if (per_gap[g] == 1) ++good;
  return static_cast<double>(good) / static_cast<double>(gap_of.size());
}

}  // namespace levelstat::test
