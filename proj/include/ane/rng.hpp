// ane/rng.hpp
//
// Deterministic random stream. xoshiro256++ seeded through splitmix64, with
// all floating-point draws derived from the integer stream so that a given
// seed produces the same values on every platform. Streams are single-owner;
// use Spawn() to derive independent substreams for workers or per-utterance
// generation.

#ifndef ANE_RNG_HPP
#define ANE_RNG_HPP

#include <array>
#include <cstdint>

namespace ane {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t NextU64();

  // Uniform in [0, 1), 53-bit resolution.
  double Uniform();
  // Uniform in [lo, hi).
  double Uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive, unbiased via rejection.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);
  // Standard normal via the Marsaglia polar method (sqrt/log only, for
  // cross-platform stability).
  double Normal();
  double Normal(double mean, double stddev);

  // Independent substream derived from this stream's seed and the index;
  // stable regardless of how much the parent has been consumed.
  Rng Spawn(std::uint64_t index) const;

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace ane

#endif  // ANE_RNG_HPP
