#include "levelstat/level_sequence.hpp"

#include <cmath>

#include "levelstat/error.hpp"

namespace levelstat {

std::string to_string(StatKind kind) {
  switch (kind) {
    case StatKind::Poisson: return "poisson";
    case StatKind::SemiPoisson: return "semi-poisson";
    case StatKind::GammaEta: return "gamma-eta";
    case StatKind::GOE: return "goe";
    case StatKind::Billiard: return "billiard";
    case StatKind::Ingested: return "ingested";
  }
  return "unknown";
}

LevelSequence::LevelSequence(std::vector<double> levels, StatKind kind, double eta)
    : levels_(std::move(levels)), kind_(kind), eta_(eta), mean_spacing_(0.0) {
  if (levels_.size() < 2) throw SizeError("a level sequence needs at least 2 levels");
  const bool allow_ties = kind_ == StatKind::Billiard;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!std::isfinite(levels_[i])) throw DataError("non-finite level at index " + std::to_string(i));
    if (i == 0) continue;
    const bool ordered = allow_ties ? levels_[i] >= levels_[i - 1] : levels_[i] > levels_[i - 1];
    if (!ordered) throw DataError("levels not increasing at index " + std::to_string(i));
  }
  mean_spacing_ = (levels_.back() - levels_.front()) / static_cast<double>(levels_.size() - 1);
  if (!(mean_spacing_ > 0.0)) throw DataError("mean spacing must be positive");
}

}  // namespace levelstat
