#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "levelstat/random.hpp"
#include "levelstat/unfolding.hpp"

/// Short- and long-range spectral observables and the analytic curves they
/// are compared against.
namespace levelstat::stats {

// ---------------------------------------------------------------------------
// Theory curves

/// Nearest-neighbour spacing law. `Gamma` is the one-parameter family
/// eta^eta s^(eta-1) e^(-eta s) / Gamma(eta); Poisson and SemiPoisson are its
/// eta = 1 and eta = 2 members. GOE is the Wigner surmise, used only as a
/// reference curve.
struct SpacingLaw {
  enum class Family { Poisson, SemiPoisson, GOE, Gamma };
  Family family = Family::SemiPoisson;
  double eta = 2.0;

  static SpacingLaw poisson() { return {Family::Poisson, 1.0}; }
  static SpacingLaw semi_poisson() { return {Family::SemiPoisson, 2.0}; }
  static SpacingLaw goe() { return {Family::GOE, 0.0}; }
  static SpacingLaw gamma(double eta) { return {Family::Gamma, eta}; }
  std::string name() const;
};

double theory_nnsd(const SpacingLaw& law, double s);
double theory_integrated_nnsd(const SpacingLaw& law, double s);

/// Second nearest-neighbour spacing density of semi-Poisson levels,
/// (8/3) s^3 e^(-2s), and its cumulative.
double theory_second_nnsd(double s);
double theory_integrated_second_nnsd(double s);

enum class FormFactorKind { Poisson, SemiPoisson, GOE };
std::string to_string(FormFactorKind kind);

/// Two-level form factor K(tau). The GOE expression 2 tau - tau ln(1 + 2 tau)
/// holds for tau <= 1; beyond that the standard branch
/// 2 - tau ln((2 tau + 1) / (2 tau - 1)) is used.
double spectral_form_factor(FormFactorKind kind, double tau);

/// Expected power spectrum of the delta_q statistic at wavenumber k for a
/// sequence of length n, with additive offset `delta_offset`.
/// Throws DomainError (pole) unless 1 <= k <= n - 1.
double theory_power_spectrum(FormFactorKind kind, std::size_t k, std::size_t n, double delta_offset);

/// Offset for the Gaussian ensembles and for Poisson sequences.
inline constexpr double kGaussianDeltaOffset = -1.0 / 12.0;
inline constexpr double kPoissonDeltaOffset = 0.0;
/// Semi-Poisson offset from `levelstat calibrate-delta` with the default
/// configuration: n = 512, 20000 daisy sequences, seed_master 20240501.
/// That run gave -0.066046 with a residual relative RMS of 0.72%.
inline constexpr double kSemiPoissonDeltaOffset = -0.0660;

double default_delta_offset(FormFactorKind kind);

// ---------------------------------------------------------------------------
// Histograms and distances

struct SpacingHistogram {
  std::vector<double> bin_edges;  // bins + 1 entries
  std::vector<double> densities;  // integrate to 1 over the binned range
  std::size_t count = 0;          // samples inside the binned range
};

/// Uniform histogram on [lo, hi). Samples outside the range are not counted.
SpacingHistogram make_histogram(std::span<const double> sample, std::size_t bins, double lo, double hi);

enum class GofMetric { KolmogorovSmirnov, ChiSquare };

using Cdf = std::function<double(double)>;

/// KS: sup |F_emp - F|. ChiSquare: Pearson statistic on `chi2_bins` uniform
/// bins over [0, chi2_max] plus an overflow bin.
double gof_distance(std::span<const double> sample, const Cdf& cdf, GofMetric metric = GofMetric::KolmogorovSmirnov,
                    std::size_t chi2_bins = 40, double chi2_max = 4.0);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// eta estimation

enum class EtaMethod { MaximumLikelihood, HistogramLeastSquares };
std::string to_string(EtaMethod method);

struct EtaFitOptions {
  EtaMethod method = EtaMethod::MaximumLikelihood;
  std::size_t bins = 40;  // histogram mode
  double max_s = 4.0;     // histogram mode
  std::size_t bootstrap_resamples = 200;
  RandomSeed bootstrap_seed{0x5eed, 1};
};

struct EtaFit {
  double eta = 1.0;
  double std_error = 0.0;
  EtaMethod method = EtaMethod::MaximumLikelihood;
  std::size_t count = 0;
};

/// Fit of the gamma spacing family. Spacings are renormalized to unit mean
/// first. The likelihood estimate is restricted to eta >= 1; its standard
/// error comes from the observed Fisher information. The histogram mode
/// minimizes squared density residuals and reports a bootstrap error.
EtaFit fit_eta(std::span<const double> spacings, const EtaFitOptions& options = {});

// ---------------------------------------------------------------------------
// Long-range statistics

/// delta_q = eps_{q+1} - eps_1 - q for q = 0 .. N-1, N = count - 1.
struct DeltaSeries {
  std::vector<double> values;
  std::size_t n() const { return values.size(); }
};

DeltaSeries delta_series(const unfolding::UnfoldedSpectrum& spectrum);

struct PowerSpectrumEstimate {
  std::vector<double> s_of_k;  // index k - 1 for k = 1 .. n-1
  std::size_t n = 0;
  std::size_t ensembles_averaged = 1;

  double at(std::size_t k) const { return s_of_k.at(k - 1); }
};

/// s(k) = |N^(-1/2) sum_q delta_q exp(-2 pi i k q / N)|^2. Needs N >= 8.
PowerSpectrumEstimate power_spectrum(const DeltaSeries& series);

/// Mean of equally long spectra. Pairwise summation makes the result
/// independent of how the inputs were produced, as long as their order is fixed.
PowerSpectrumEstimate average_power_spectra(std::span<const PowerSpectrumEstimate> spectra);

/// Mean power spectrum of `sequences` daisy (semi-Poisson) or Poisson
/// sequences with n + 1 levels each, every sequence rescaled to exact unit
/// mean spacing before delta_q is formed. Stream i uses seed.child(i).
PowerSpectrumEstimate ensemble_power_spectrum(FormFactorKind kind, std::size_t n, std::size_t sequences,
                                              const RandomSeed& seed);

/// Relative RMS deviation sqrt(mean(((s - th) / th)^2)) over k in [k_lo, k_hi].
double relative_rms_deviation(const PowerSpectrumEstimate& estimate, FormFactorKind kind, double delta_offset,
                              std::size_t k_lo, std::size_t k_hi);

struct DeltaCalibration {
  double delta = 0.0;
  double relative_rms = 0.0;
  std::size_t n = 0;
  std::size_t sequences = 0;
  RandomSeed seed;
};

/// Offset minimizing the mean squared relative deviation of a Monte Carlo
/// semi-Poisson spectrum from the theory curve over k in [1, n/4].
DeltaCalibration calibrate_semi_poisson_delta(std::size_t n, std::size_t sequences, const RandomSeed& seed);

}  // namespace levelstat::stats
