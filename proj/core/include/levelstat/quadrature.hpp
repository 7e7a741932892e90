#pragma once

#include <functional>
#include <span>

namespace levelstat {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated, including any supplied tail bound
  int evaluations = 0;
  int intervals = 0;
};

struct QuadratureOptions {
  double abs_tolerance = 1e-10;
  int max_intervals = 4000;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. The interval
/// is pre-split at `breakpoints` lying inside (a, b). Throws NumericalError,
/// quoting the achieved error, when the tolerance cannot be reached within
/// `max_intervals` subdivisions.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    std::span<const double> breakpoints = {},
                                    const QuadratureOptions& options = {});

}  // namespace levelstat
