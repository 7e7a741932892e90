#pragma once

#include <span>
#include <string>
#include <vector>

namespace levelstat {

enum class StatKind {
  Poisson,
  SemiPoisson,
  GammaEta,
  GOE,
  Billiard,
  Ingested,
};

std::string to_string(StatKind kind);

/// An ordered list of eigenvalues or resonance frequencies.
///
/// Levels are strictly increasing, except for billiard spectra where
/// accidental degeneracies are legitimate and kept as repeated values.
/// `eta` is meaningful only for `StatKind::GammaEta` (and is set to 1 and 2
/// for Poisson and semi-Poisson sequences produced by the generators).
class LevelSequence {
 public:
  LevelSequence(std::vector<double> levels, StatKind kind, double eta = 0.0);

  std::span<const double> levels() const { return levels_; }
  const std::vector<double>& values() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  double front() const { return levels_.front(); }
  double back() const { return levels_.back(); }
  double operator[](std::size_t i) const { return levels_[i]; }

  StatKind kind() const { return kind_; }
  double eta() const { return eta_; }
  // (last - first) / (count - 1).
  double mean_spacing() const { return mean_spacing_; }

 private:
  std::vector<double> levels_;
  StatKind kind_;
  double eta_;
  double mean_spacing_;
};

}  // namespace levelstat
