#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace affsob {

/// Stateless counter-based generator: every (seed, counter) pair maps to an
/// independent 64-bit word, so parallel samplers never share state.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  // splitmix64 finalizer applied to a keyed counter
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + counter + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  return z ^ (z >> 31);
}

/// Uniform double in the open interval (0, 1).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(counter_hash(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two consecutive counters.
inline double counter_normal(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = counter_uniform(seed, 2 * counter);
  const double u2 = counter_uniform(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential wrapper over the counter generator, for test/ensemble setup.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  double uniform() { return counter_uniform(seed_, next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return counter_normal(seed_ ^ 0xA5A5A5A5ULL, next_++); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

}  // namespace affsob
