#pragma once

#include <cstdint>
#include <random>

namespace levelstat {

/// Identifies one reproducible random stream. Identical (master, stream_id)
/// pairs give bit-identical draws on every platform; per-task streams for
/// parallel Monte Carlo are obtained with `child`.
struct RandomSeed {
  std::uint64_t master = 0;
  std::uint64_t stream_id = 0;

  RandomSeed child(std::uint64_t index) const;
  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

/// Engine plus the handful of variates the toolkit needs. Distributions are
/// implemented here rather than taken from <random> because the standard
/// leaves their algorithms unspecified.
class Rng {
 public:
  explicit Rng(const RandomSeed& seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double exponential();
  double normal();
  // Gamma variate with the given shape and unit scale. Integer shapes sum
  // exponentials; other shapes invert the regularized incomplete gamma
  // function, so no draw is ever rejected.
  double gamma(double shape);
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace levelstat
