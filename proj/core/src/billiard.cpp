#include "levelstat/billiard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levelstat/error.hpp"

namespace levelstat::billiard {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double to_wavenumber_sq(double nu_ghz) {
  const double k = 2.0 * kPi * nu_ghz * 1e9 / kSpeedOfLight;
  return k * k;
}

double to_frequency_ghz(double k_sq) { return kSpeedOfLight * std::sqrt(k_sq) / (2.0 * kPi) * 1e-9; }

// Symmetric 2x2 matrix [xx xy; xy yy]; single-scatterer problems use xx only.
struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  Sym2& operator+=(const Sym2& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
};

Sym2 scaled(const Sym2& a, double f) { return {a.xx * f, a.xy * f, a.yy * f}; }

// Ascending eigenvalues.
std::array<double, 2> eigenvalues(const Sym2& m) {
  const double mean = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double r = std::hypot(half_diff, m.xy);
  return {mean - r, mean + r};
}

// Unit eigenvector for the larger eigenvalue.
std::array<double, 2> top_eigenvector(const Sym2& m) {
  const auto ev = eigenvalues(m);
  double vx = m.xy, vy = ev[1] - m.xx;
  if (std::hypot(vx, vy) < 1e-300) {
    vx = ev[1] - m.yy;
    vy = m.xy;
  }
  double norm = std::hypot(vx, vy);
  if (norm < 1e-300) return {1.0, 0.0};
  return {vx / norm, vy / norm};
}

struct CoupledMode {
  double energy;     // k^2 in 1/m^2
  Sym2 coupling;     // 4 pi psi(r_i) psi(r_j)
  double regulator;  // E_n / (E_n^2 + E_s^2)
};

// Secular matrix M(E) = 4 pi G_reg(E) - diag(1/strength) for up to two scatterers.
class SecularMatrix {
 public:
  SecularMatrix(const CavityGeometry& geom, const std::vector<PointScatterer>& scatterers, double nu_lo,
                double nu_hi)
      : dims_(static_cast<int>(scatterers.size())) {
    reference_sq_ = to_wavenumber_sq(0.5 * (nu_lo + nu_hi));
    const double near_limit = 2.0 * nu_hi;
    const double far_limit = 6.0 * nu_hi;
    const auto modes = rectangle_modes(geom.length_l1, geom.width_l2, far_limit);
    far_min_sq_ = to_wavenumber_sq(near_limit);
    cutoff_sq_ = to_wavenumber_sq(far_limit);
    far_moments_.fill(Sym2{});
    const double norm = 4.0 / geom.area();
    for (const Mode& mode : modes) {
      std::array<double, 2> amp{0.0, 0.0};
      for (int j = 0; j < dims_; ++j) {
        const auto& s = scatterers[static_cast<std::size_t>(j)];
        amp[static_cast<std::size_t>(j)] = std::sin(mode.m * kPi * s.x / geom.length_l1) *
                                           std::sin(mode.n * kPi * s.y / geom.width_l2);
      }
      const double f = 4.0 * kPi * norm;
      const Sym2 c{f * amp[0] * amp[0], f * amp[0] * amp[1], f * amp[1] * amp[1]};
      const double e = to_wavenumber_sq(mode.frequency_ghz);
      const double reg = e / (e * e + reference_sq_ * reference_sq_);
      if (mode.frequency_ghz <= near_limit) {
        near_.push_back({e, c, reg});
      } else {
        // 1/(E - E_n) + reg = (reg - 1/E_n) - sum_{k>=1} E^k / E_n^(k+1)
        far_constant_ += scaled(c, reg - 1.0 / e);
        double ratio = far_min_sq_ / e;
        double power = 1.0 / e;
        for (std::size_t k = 0; k < far_moments_.size(); ++k) {
          power *= ratio;  // far_min^(k+1) / E_n^(k+2)
          far_moments_[k] += scaled(c, power);
        }
      }
    }
    for (int j = 0; j < dims_; ++j) inverse_strength_[static_cast<std::size_t>(j)] = 1.0 / scatterers[static_cast<std::size_t>(j)].strength;
  }

  int dims() const { return dims_; }
  const std::vector<CoupledMode>& near_modes() const { return near_; }

  // M(E) with the near modes in [skip_begin, skip_end) left out.
  Sym2 evaluate(double e, std::size_t skip_begin = 0, std::size_t skip_end = 0) const {
    Sym2 sum{};
    for (std::size_t i = 0; i < near_.size(); ++i) {
      if (i >= skip_begin && i < skip_end) continue;
      const CoupledMode& m = near_[i];
      const double w = 1.0 / (e - m.energy) + m.regulator;
      sum.xx += m.coupling.xx * w;
      sum.xy += m.coupling.xy * w;
      sum.yy += m.coupling.yy * w;
    }
    sum += far_constant_;
    // Horner in x = E / far_min over the far-mode moments.
    const double x = e / far_min_sq_;
    Sym2 series{};
    for (std::size_t k = far_moments_.size(); k-- > 0;) {
      series = scaled(series, x);
      series += far_moments_[k];
    }
    series = scaled(series, x);
    sum += scaled(series, -1.0);
    // Modes above the enumeration limit: mean density A/(4 pi), mean psi^2 = 1/A.
    const double tail = -e / cutoff_sq_;
    sum.xx += tail - inverse_strength_[0];
    if (dims_ == 2) sum.yy += tail - inverse_strength_[1];
    return sum;
  }

  double branch(double e, int b, std::size_t skip_begin = 0, std::size_t skip_end = 0) const {
    const Sym2 m = evaluate(e, skip_begin, skip_end);
    if (dims_ == 1) return m.xx;
    return eigenvalues(m)[static_cast<std::size_t>(b)];
  }

 private:
  int dims_;
  double reference_sq_ = 0.0;
  double far_min_sq_ = 0.0;
  double cutoff_sq_ = 0.0;
  std::vector<CoupledMode> near_;
  Sym2 far_constant_{};
  std::array<Sym2, 40> far_moments_{};
  std::array<double, 2> inverse_strength_{0.0, 0.0};
};

struct Pole {
  double energy;
  std::size_t begin, end;  // range in near_modes()
  int rank;
  Sym2 residue;
};

// Branch limits at a pole: `from_right` gives the limit as E -> pole+.
double branch_limit(const SecularMatrix& sec, const Pole& pole, int b, bool from_right) {
  const int s = sec.dims();
  const int r = pole.rank;
  if (from_right && b >= s - r) return kInf;
  if (!from_right && b < r) return -kInf;
  const Sym2 rest = sec.evaluate(pole.energy, pole.begin, pole.end);
  if (r == 0) return s == 1 ? rest.xx : eigenvalues(rest)[static_cast<std::size_t>(b)];
  // s == 2, r == 1: compress onto the null space of the residue.
  const auto v = top_eigenvector(pole.residue);
  const double ux = -v[1], uy = v[0];
  return ux * ux * rest.xx + 2.0 * ux * uy * rest.xy + uy * uy * rest.yy;
}

double bisect_root(const SecularMatrix& sec, int b, double lo, double hi) {
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double value = sec.branch(mid, b);
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "secular function not finite at k^2=" << mid << " while bracketing [" << lo << ", " << hi << "]";
      throw NumericalError(msg.str());
    }
    if (value > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-14 * hi) break;
  }
  const double root = 0.5 * (lo + hi);
  if (!(hi - lo <= 1e-11 * hi)) {
    std::ostringstream msg;
    msg << "bisection did not converge: bracket [" << lo << ", " << hi << "]";
    throw NumericalError(msg.str());
  }
  return root;
}

}  // namespace

void CavityGeometry::validate() const {
  if (!(length_l1 > 0.0 && width_l2 > 0.0 && height_d > 0.0))
    throw DomainError("cavity dimensions must be positive");
}

double WeylLaw::inverse(double count) const {
  if (a2 == 0.0) return (count - a0) / a1;
  const double disc = a1 * a1 - 4.0 * a2 * (a0 - count);
  if (disc < 0.0) throw DomainError("Weyl law has no real inverse at count " + std::to_string(count));
  // Larger root, written to avoid cancellation.
  const double root_disc = std::sqrt(disc);
  if (a1 <= 0.0) return (-a1 + root_disc) / (2.0 * a2);
  return 2.0 * (a0 - count) / (-a1 - root_disc);
}

WeylLaw weyl_law(const CavityGeometry& geom) {
  geom.validate();
  const double c = kSpeedOfLight;
  WeylLaw law;
  law.a2 = geom.area() * kPi / (c * c) * 1e18;
  law.a1 = -geom.perimeter() / (2.0 * c) * 1e9;
  law.a0 = 0.25;  // four right-angle corners
  return law;
}

double weyl_counting(const CavityGeometry& geom, double nu_ghz) {
  if (!(nu_ghz >= 0.0)) throw DomainError("frequency must be non-negative");
  return weyl_law(geom)(nu_ghz);
}

std::vector<Mode> rectangle_modes(double length_l1, double width_l2, double nu_max_ghz) {
  std::vector<Mode> modes;
  const double half_c = 0.5 * kSpeedOfLight * 1e-9;
  const double limit = nu_max_ghz / half_c;  // sqrt((m/L1)^2 + (n/L2)^2) bound
  const int m_max = static_cast<int>(std::floor(limit * length_l1)) + 1;
  for (int m = 1; m <= m_max; ++m) {
    const double qm = m / length_l1;
    if (qm > limit) break;
    const int n_max = static_cast<int>(std::floor(std::sqrt(std::max(0.0, limit * limit - qm * qm)) * width_l2)) + 1;
    for (int n = 1; n <= n_max; ++n) {
      const double qn = n / width_l2;
      const double nu = half_c * std::sqrt(qm * qm + qn * qn);
      if (nu <= nu_max_ghz) modes.push_back({m, n, nu});
    }
  }
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.frequency_ghz != b.frequency_ghz) return a.frequency_ghz < b.frequency_ghz;
    return a.m != b.m ? a.m < b.m : a.n < b.n;
  });
  return modes;
}

LevelSequence rectangle_eigenfrequencies(const CavityGeometry& geom, double nu_max_ghz) {
  geom.validate();
  if (nu_max_ghz > geom.cutoff_ghz())
    throw DomainError("nu_max " + std::to_string(nu_max_ghz) + " GHz exceeds the TM_0 cut-off " +
                      std::to_string(geom.cutoff_ghz()) + " GHz");
  const auto modes = rectangle_modes(geom.length_l1, geom.width_l2, nu_max_ghz);
  std::vector<double> levels;
  levels.reserve(modes.size());
  for (const Mode& m : modes) levels.push_back(m.frequency_ghz);
  return LevelSequence(std::move(levels), StatKind::Billiard);
}

PerturbedSpectrum perturb_point_scatterers(const CavityGeometry& geom, const ScattererSet& set,
                                           std::pair<double, double> band_ghz) {
  geom.validate();
  const auto [nu_lo, nu_hi] = band_ghz;
  if (!(nu_lo > 0.0 && nu_hi > nu_lo && nu_hi < geom.cutoff_ghz()))
    throw DomainError("band must satisfy 0 < low < high < cut-off");
  if (set.scatterers.empty() || set.scatterers.size() > 2) throw DomainError("one or two scatterers are supported");
  for (std::size_t i = 0; i < set.scatterers.size(); ++i) {
    const auto& s = set.scatterers[i];
    if (!(s.x > 0.0 && s.x < geom.length_l1 && s.y > 0.0 && s.y < geom.width_l2))
      throw DomainError("scatterer " + std::to_string(i) + " is not strictly inside the cavity");
    if (!std::isfinite(s.strength)) throw DomainError("scatterer strength must be finite");
    for (std::size_t j = 0; j < i; ++j)
      if (set.scatterers[j].x == s.x && set.scatterers[j].y == s.y) throw DomainError("duplicate scatterer position");
  }

  PerturbedSpectrum out;
  for (const Mode& m : rectangle_modes(geom.length_l1, geom.width_l2, nu_hi))
    if (m.frequency_ghz >= nu_lo) out.unperturbed.push_back(m.frequency_ghz);

  std::vector<PointScatterer> active;
  for (const auto& s : set.scatterers)
    if (s.strength != 0.0) active.push_back(s);
  if (active.empty()) {
    out.levels = out.unperturbed;
    return out;
  }

  const SecularMatrix sec(geom, active, nu_lo, nu_hi);
  const double e_lo = to_wavenumber_sq(nu_lo);
  const double e_hi = to_wavenumber_sq(nu_hi);
  const auto& near = sec.near_modes();
  double scale = 0.0;
  for (const auto& m : near) scale = std::max(scale, m.coupling.xx + m.coupling.yy);
  const double rank_tol = 1e-20 * scale;

  // Group (near-)degenerate modes into poles and split off uncoupled ones.
  std::vector<Pole> poles;
  std::vector<double> untouched;  // k^2 of modes that keep their empty-cavity value
  for (std::size_t i = 0; i < near.size();) {
    std::size_t j = i + 1;
    while (j < near.size() && near[j].energy - near[i].energy <= 1e-12 * near[i].energy) ++j;
    Sym2 residue{};
    for (std::size_t k = i; k < j; ++k) residue += near[k].coupling;
    const auto ev = eigenvalues(residue);
    int rank = 0;
    if (sec.dims() == 1) rank = residue.xx > rank_tol ? 1 : 0;
    // The smaller eigenvalue of a rank-one residue is rounding noise of order
    // 1e-16 * ev[1], so the second rank is judged relative to the first.
    else rank = ev[1] > rank_tol ? 1 + (ev[0] > 1e-9 * ev[1] ? 1 : 0) : 0;
    const int multiplicity = static_cast<int>(j - i);
    for (int k = rank; k < multiplicity; ++k) untouched.push_back(near[i].energy);
    if (rank > 0) poles.push_back({near[i].energy, i, j, rank, residue});
    i = j;
  }

  for (double e : untouched)
    if (e >= e_lo && e <= e_hi) out.levels.push_back(to_frequency_ghz(e));

  // Segment boundaries: band edges and the coupled poles inside the band.
  struct Boundary {
    double energy;
    const Pole* pole;
  };
  std::vector<Boundary> bounds{{e_lo, nullptr}};
  for (const Pole& p : poles)
    if (p.energy > e_lo && p.energy < e_hi) bounds.push_back({p.energy, &p});
  bounds.push_back({e_hi, nullptr});

  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const Boundary& left = bounds[seg];
    const Boundary& right = bounds[seg + 1];
    for (int b = 0; b < sec.dims(); ++b) {
      const double lv = left.pole ? branch_limit(sec, *left.pole, b, true) : sec.branch(left.energy, b);
      const double rv = right.pole ? branch_limit(sec, *right.pole, b, false) : sec.branch(right.energy, b);
      if (lv > 0.0 && rv < 0.0) {
        out.levels.push_back(to_frequency_ghz(bisect_root(sec, b, left.energy, right.energy)));
        ++out.shifted_roots;
      }
    }
  }
  std::sort(out.levels.begin(), out.levels.end());
  const bool coupled_in_band = std::any_of(poles.begin(), poles.end(), [&](const Pole& p) {
    return p.energy >= e_lo && p.energy <= e_hi;
  });
  out.uncoupled = !coupled_in_band;
  if (out.uncoupled) out.levels = out.unperturbed;
  return out;
}

}  // namespace levelstat::billiard
