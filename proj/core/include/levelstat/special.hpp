#pragma once

namespace levelstat {

/// Sine and cosine integrals in upper-tail form:
///   si(x) = -int_x^inf sin(t)/t dt = Si(x) - pi/2
///   ci(x) = -int_x^inf cos(t)/t dt
struct SiCi {
  double si;
  double ci;
};

/// Power series below x = 4, continued fraction for E1(ix) above.
/// Absolute error stays under 1e-12 on (0, 1e4]. Throws DomainError for x <= 0.
SiCi sici(double x);

/// Auxiliary functions f(x) = ci(x) sin(x) - si(x) cos(x) and
/// g(x) = -ci(x) cos(x) - si(x) sin(x), evaluated without cancellation for
/// large x.
struct SiCiAuxiliary {
  double f;
  double g;
};
SiCiAuxiliary sici_auxiliary(double x);

}  // namespace levelstat
