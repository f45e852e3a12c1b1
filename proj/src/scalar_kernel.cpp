#include "affsob/scalar_kernel.hpp"

#include <sstream>

#include "affsob/random.hpp"

namespace affsob {

double weighted_halfball_volume(int n, double a, VolumeMode mode) {
  if (n < 2 || a < 0.0) throw DomainError("weighted_halfball_volume: requires n >= 2, a >= 0");
  const double log_tail = log_gamma(0.5 * (a + 1.0)) - std::log(2.0) - log_gamma(0.5 * (n + a + 2.0));
  switch (mode) {
    case VolumeMode::closed_form:
      return std::exp(0.5 * (n - 1) * std::log(std::numbers::pi) + log_tail);
    case VolumeMode::paper_printed:
      return std::exp(0.5 * (n - 2 - a) * std::log(std::numbers::pi) + log_tail);
    case VolumeMode::quadrature:
      return weighted_halfball_volume_mc(n, a, 1'000'000, 0x5EEDULL).value;
  }
  throw DomainError("weighted_halfball_volume: unknown mode");
}

Estimate weighted_halfball_volume_mc(int n, double a, std::int64_t samples, std::uint64_t seed) {
  if (n < 2 || a < 0.0 || samples < 2) throw DomainError("weighted_halfball_volume_mc: bad arguments");
  // Uniform samples in the box [0,1] x [-1,1]^{n-1}; box volume 2^{n-1}.
  const double box = std::ldexp(1.0, n - 1);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n);
    const double t = counter_uniform(seed, base);
    double r2 = t * t;
    for (int k = 1; k < n; ++k) {
      const double x = 2.0 * counter_uniform(seed, base + k) - 1.0;
      r2 += x * x;
    }
    const double g = r2 <= 1.0 ? box * std::pow(t, a) : 0.0;
    const double delta = g - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (g - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

void Params::validate_sobolev() const {
  if (n < 2) throw DomainError("n must be >= 2");
  if (!(a >= 0.0)) throw DomainError("a must be >= 0");
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  if (!(p < n + a)) throw DomainError("p must be < n + a");
}

void Params::validate_gn() const {
  validate_sobolev();
  if (!alpha) throw DomainError("alpha required");
  const double al = *alpha;
  if (!(al > 0.0) || al > alpha_max() * (1.0 + 1e-15)) throw DomainError("alpha outside (0, (n+a)/(n+a-p)]");
  if (al == 1.0) throw DomainError("alpha must differ from 1");
}

void Params::validate_entropy() const {
  if (n < 2) throw DomainError("n must be >= 2");
  if (!(a >= 0.0)) throw DomainError("a must be >= 0");
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
}

std::string Params::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << n << " p=" << p << " a=" << a;
  if (alpha) os << " alpha=" << *alpha;
  return os.str();
}

}  // namespace affsob
