#include "levelstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <fftw3.h>

#include "levelstat/ensembles.hpp"
#include "levelstat/error.hpp"
#include "levelstat/parallel.hpp"

namespace levelstat::stats {
namespace {

constexpr double kPi = std::numbers::pi;

void require_non_negative(double s) {
  if (!(s >= 0.0)) throw DomainError("spacing argument must be >= 0, got " + std::to_string(s));
}

double gamma_density(double eta, double s) {
  if (s == 0.0) return eta == 1.0 ? 1.0 : 0.0;
  return std::exp(eta * std::log(eta) + (eta - 1.0) * std::log(s) - eta * s - std::lgamma(eta));
}

std::vector<double> normalized_to_unit_mean(std::span<const double> spacings) {
  double sum = 0.0;
  for (double s : spacings) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DataError("spacings must be finite and non-negative");
    sum += s;
  }
  if (!(sum > 0.0)) throw FitError("all spacings are zero");
  const double mean = sum / static_cast<double>(spacings.size());
  std::vector<double> out(spacings.begin(), spacings.end());
  for (double& s : out) s /= mean;
  return out;
}

EtaFit fit_eta_likelihood(const std::vector<double>& s) {
  // With unit sample mean the score reduces to ln(eta) - psi(eta) + <ln s> = 0.
  double log_sum = 0.0;
  for (double v : s) {
    if (v == 0.0) throw FitError("zero spacing has zero likelihood for eta > 1");
    log_sum += std::log(v);
  }
  const double n = static_cast<double>(s.size());
  const double mean_log = log_sum / n;
  auto score = [&](double eta) { return std::log(eta) - boost::math::digamma(eta) + mean_log; };
  if (!(mean_log < -1e-13)) throw FitError("degenerate spacings (all equal); eta is unbounded");
  EtaFit fit;
  fit.method = EtaMethod::MaximumLikelihood;
  fit.count = s.size();
  if (score(1.0) <= 0.0) {
    fit.eta = 1.0;
  } else {
    double lo = 1.0, hi = 2.0;
    while (score(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e8) throw FitError("eta estimate diverges");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (score(mid) > 0.0 ? lo : hi) = mid;
    }
    fit.eta = 0.5 * (lo + hi);
  }
  const double information = n * (boost::math::trigamma(fit.eta) - 1.0 / fit.eta);
  fit.std_error = 1.0 / std::sqrt(information);
  return fit;
}

double histogram_lsq_eta(const std::vector<double>& s, std::size_t bins, double max_s) {
  const SpacingHistogram h = make_histogram(s, bins, 0.0, max_s);
  // Compare against bin-averaged theory; the histogram is normalized on the
  // binned range, so the theory is renormalized the same way.
  auto objective = [&](double eta) {
    const double mass = boost::math::gamma_p(eta, eta * max_s);
    double sum = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
      const double a = h.bin_edges[j], b = h.bin_edges[j + 1];
      const double th = (boost::math::gamma_p(eta, eta * b) - boost::math::gamma_p(eta, eta * a)) / ((b - a) * mass);
      const double r = h.densities[j] - th;
      sum += r * r;
    }
    return sum;
  };
  const auto best = boost::math::tools::brent_find_minima(objective, 1.0, 60.0, 50);
  return best.first;
}

EtaFit fit_eta_histogram(const std::vector<double>& s, const EtaFitOptions& options) {
  EtaFit fit;
  fit.method = EtaMethod::HistogramLeastSquares;
  fit.count = s.size();
  fit.eta = histogram_lsq_eta(s, options.bins, options.max_s);
  if (options.bootstrap_resamples >= 2) {
    Rng rng(options.bootstrap_seed);
    std::vector<double> resample(s.size());
    std::vector<double> estimates;
    for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
      for (double& v : resample) v = s[rng.below(s.size())];
      estimates.push_back(histogram_lsq_eta(normalized_to_unit_mean(resample), options.bins, options.max_s));
    }
    const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(estimates.size());
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    fit.std_error = std::sqrt(var / static_cast<double>(estimates.size() - 1));
  }
  return fit;
}

double pairwise_sum(const std::vector<const PowerSpectrumEstimate*>& items, std::size_t begin, std::size_t end,
                    std::size_t k) {
  if (end - begin == 1) return items[begin]->s_of_k[k];
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(items, begin, mid, k) + pairwise_sum(items, mid, end, k);
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::string SpacingLaw::name() const {
  switch (family) {
    case Family::Poisson: return "poisson";
    case Family::SemiPoisson: return "semi-poisson";
    case Family::GOE: return "goe";
    case Family::Gamma: return "gamma(eta=" + std::to_string(eta) + ")";
  }
  return "unknown";
}

double theory_nnsd(const SpacingLaw& law, double s) {
  require_non_negative(s);
  switch (law.family) {
    case SpacingLaw::Family::Poisson: return std::exp(-s);
    case SpacingLaw::Family::SemiPoisson: return 4.0 * s * std::exp(-2.0 * s);
    case SpacingLaw::Family::GOE: return 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
    case SpacingLaw::Family::Gamma:
      if (!(law.eta >= 1.0)) throw DomainError("eta must be >= 1");
      return gamma_density(law.eta, s);
  }
  return 0.0;
}

double theory_integrated_nnsd(const SpacingLaw& law, double s) {
  require_non_negative(s);
  switch (law.family) {
    case SpacingLaw::Family::Poisson: return -std::expm1(-s);
    case SpacingLaw::Family::SemiPoisson: return 1.0 - (1.0 + 2.0 * s) * std::exp(-2.0 * s);
    case SpacingLaw::Family::GOE: return -std::expm1(-0.25 * kPi * s * s);
    case SpacingLaw::Family::Gamma:
      if (!(law.eta >= 1.0)) throw DomainError("eta must be >= 1");
      return boost::math::gamma_p(law.eta, law.eta * s);
  }
  return 0.0;
}

double theory_second_nnsd(double s) {
  require_non_negative(s);
  return 8.0 / 3.0 * s * s * s * std::exp(-2.0 * s);
}

double theory_integrated_second_nnsd(double s) {
  require_non_negative(s);
  const double x = 2.0 * s;
  return 1.0 - std::exp(-x) * (1.0 + x + x * x / 2.0 + x * x * x / 6.0);
}

std::string to_string(FormFactorKind kind) {
  switch (kind) {
    case FormFactorKind::Poisson: return "poisson";
    case FormFactorKind::SemiPoisson: return "semi-poisson";
    case FormFactorKind::GOE: return "goe";
  }
  return "unknown";
}

double spectral_form_factor(FormFactorKind kind, double tau) {
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
  switch (kind) {
    case FormFactorKind::Poisson: return 1.0;
    case FormFactorKind::SemiPoisson: {
      const double p = kPi * kPi * tau * tau;
      return (2.0 + p) / (4.0 + p);
    }
    case FormFactorKind::GOE:
      if (tau <= 1.0) return 2.0 * tau - tau * std::log1p(2.0 * tau);
      return 2.0 - tau * std::log((2.0 * tau + 1.0) / (2.0 * tau - 1.0));
  }
  return 0.0;
}

double theory_power_spectrum(FormFactorKind kind, std::size_t k, std::size_t n, double delta_offset) {
  if (k == 0 || k >= n) throw DomainError("power spectrum pole: k must satisfy 1 <= k <= n-1");
  const double tau = static_cast<double>(k) / static_cast<double>(n);
  const double comp = 1.0 - tau;
  const double first = (spectral_form_factor(kind, tau) - 1.0) / (tau * tau);
  const double second = (spectral_form_factor(kind, comp) - 1.0) / (comp * comp);
  const double sine = std::sin(kPi * tau);
  return (first + second) / (4.0 * kPi * kPi) + 1.0 / (4.0 * sine * sine) + delta_offset;
}

double default_delta_offset(FormFactorKind kind) {
  switch (kind) {
    case FormFactorKind::Poisson: return kPoissonDeltaOffset;
    case FormFactorKind::SemiPoisson: return kSemiPoissonDeltaOffset;
    case FormFactorKind::GOE: return kGaussianDeltaOffset;
  }
  return 0.0;
}

SpacingHistogram make_histogram(std::span<const double> sample, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw DomainError("histogram needs bins > 0 and hi > lo");
  SpacingHistogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t j = 0; j <= bins; ++j) h.bin_edges[j] = lo + width * static_cast<double>(j);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : sample) {
    if (!(v >= lo && v < hi)) continue;
    auto j = static_cast<std::size_t>((v - lo) / width);
    if (j >= bins) j = bins - 1;
    ++counts[j];
    ++h.count;
  }
  if (h.count == 0) throw SizeError("no samples inside the histogram range");
  h.densities.resize(bins);
  for (std::size_t j = 0; j < bins; ++j)
    h.densities[j] = static_cast<double>(counts[j]) / (static_cast<double>(h.count) * width);
  return h;
}

double gof_distance(std::span<const double> sample, const Cdf& cdf, GofMetric metric, std::size_t chi2_bins,
                    double chi2_max) {
  if (sample.empty()) throw SizeError("goodness-of-fit needs a nonempty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  if (metric == GofMetric::KolmogorovSmirnov) {
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const double f = cdf(sorted[i]);
      d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
  }
  if (chi2_bins == 0 || !(chi2_max > 0.0)) throw DomainError("chi-square needs bins > 0 and a positive range");
  std::vector<double> observed(chi2_bins + 1, 0.0);
  const double width = chi2_max / static_cast<double>(chi2_bins);
  for (double v : sorted) {
    const auto j = v >= chi2_max ? chi2_bins : static_cast<std::size_t>(std::max(0.0, v) / width);
    observed[std::min(j, chi2_bins)] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t j = 0; j <= chi2_bins; ++j) {
    const double a = width * static_cast<double>(j);
    const double p = j == chi2_bins ? 1.0 - cdf(chi2_max) : cdf(a + width) - cdf(a);
    const double expected = n * p;
    if (expected > 0.0) chi2 += (observed[j] - expected) * (observed[j] - expected) / expected;
  }
  return chi2;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw SizeError("two-sample KS needs nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

std::string to_string(EtaMethod method) {
  return method == EtaMethod::MaximumLikelihood ? "mle" : "histogram-lsq";
}

EtaFit fit_eta(std::span<const double> spacings, const EtaFitOptions& options) {
  if (spacings.size() < 100) throw SizeError("fit_eta needs at least 100 spacings");
  const auto s = normalized_to_unit_mean(spacings);
  return options.method == EtaMethod::MaximumLikelihood ? fit_eta_likelihood(s) : fit_eta_histogram(s, options);
}

DeltaSeries delta_series(const unfolding::UnfoldedSpectrum& spectrum) {
  if (spectrum.size() < 3) throw SizeError("delta series needs at least 3 levels");
  const std::size_t n = spectrum.size() - 1;
  DeltaSeries d;
  d.values.resize(n);
  const double first = spectrum.epsilons.front();
  for (std::size_t q = 0; q < n; ++q) d.values[q] = spectrum.epsilons[q] - first - static_cast<double>(q);
  return d;
}

PowerSpectrumEstimate power_spectrum(const DeltaSeries& series) {
  const std::size_t n = series.n();
  if (n < 8) throw SizeError("power spectrum needs N >= 8");
  std::vector<double> in(series.values);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  PowerSpectrumEstimate est;
  est.n = n;
  est.s_of_k.resize(n - 1);
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const std::complex<double> v = k <= n / 2 ? out[k] : std::conj(out[n - k]);
    est.s_of_k[k - 1] = std::norm(v) * norm;
  }
  return est;
}

PowerSpectrumEstimate average_power_spectra(std::span<const PowerSpectrumEstimate> spectra) {
  if (spectra.empty()) throw SizeError("nothing to average");
  const std::size_t n = spectra.front().n;
  std::vector<const PowerSpectrumEstimate*> items;
  std::size_t total = 0;
  for (const auto& s : spectra) {
    if (s.n != n) throw SizeError("power spectra of different lengths cannot be averaged");
    items.push_back(&s);
    total += s.ensembles_averaged;
  }
  PowerSpectrumEstimate mean;
  mean.n = n;
  mean.ensembles_averaged = total;
  mean.s_of_k.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    mean.s_of_k[k] = pairwise_sum(items, 0, items.size(), k) / static_cast<double>(items.size());
  return mean;
}

PowerSpectrumEstimate ensemble_power_spectrum(FormFactorKind kind, std::size_t n, std::size_t sequences,
                                              const RandomSeed& seed) {
  if (sequences == 0) throw SizeError("need at least one sequence");
  std::vector<PowerSpectrumEstimate> spectra(sequences);
  parallel_for(sequences, [&](std::size_t i) {
    const RandomSeed stream = seed.child(i);
    std::optional<LevelSequence> levels;
    switch (kind) {
      case FormFactorKind::SemiPoisson: levels = ensembles::sample_daisy_levels(n + 1, 1, stream); break;
      case FormFactorKind::Poisson:
        levels = ensembles::sample_gamma_levels({StatKind::Poisson, n + 1, 1.0, 0}, stream);
        break;
      case FormFactorKind::GOE: {
        const auto goe = ensembles::sample_goe_levels({StatKind::GOE, 0, 0.0, 2 * (n + 1)}, stream);
        std::vector<double> head(goe.values().begin(), goe.values().begin() + static_cast<std::ptrdiff_t>(n + 1));
        levels.emplace(std::move(head), StatKind::GOE);
        break;
      }
    }
    spectra[i] = power_spectrum(delta_series(unfolding::rescale_unit_mean(*levels)));
  });
  return average_power_spectra(spectra);
}

double relative_rms_deviation(const PowerSpectrumEstimate& estimate, FormFactorKind kind, double delta_offset,
                              std::size_t k_lo, std::size_t k_hi) {
  if (k_lo < 1 || k_hi < k_lo || k_hi >= estimate.n) throw DomainError("invalid k range");
  double sum = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double th = theory_power_spectrum(kind, k, estimate.n, delta_offset);
    const double r = (estimate.at(k) - th) / th;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(k_hi - k_lo + 1));
}

DeltaCalibration calibrate_semi_poisson_delta(std::size_t n, std::size_t sequences, const RandomSeed& seed) {
  const auto estimate = ensemble_power_spectrum(FormFactorKind::SemiPoisson, n, sequences, seed);
  const std::size_t k_hi = n / 4;
  auto objective = [&](double delta) {
    return relative_rms_deviation(estimate, FormFactorKind::SemiPoisson, delta, 1, k_hi);
  };
  const auto best = boost::math::tools::brent_find_minima(objective, -0.5, 0.5, 50);
  return {best.first, best.second, n, sequences, seed};
}

}  // namespace levelstat::stats
