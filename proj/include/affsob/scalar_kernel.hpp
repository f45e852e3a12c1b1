#pragma once

// Special functions and the elementary closed-form constants: Gamma, unit-ball
// volumes rho_k, the centroid normalization a_{n,p}, the affine-energy
// normalization c_{n,p}, and the weighted half-ball volume.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "affsob/errors.hpp"

namespace affsob {

template <typename Scalar>
Scalar log_gamma(Scalar x) {
  // Lanczos approximation, g = 7, nine terms (~15 significant digits).
  static constexpr std::array<double, 9> kCoeff = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (!(x > Scalar(0))) throw DomainError("log_gamma: argument must be positive");
  if (x < Scalar(0.5)) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return std::log(pi / std::sin(pi * x)) - log_gamma(Scalar(1) - x);
  }
  const Scalar z = x - Scalar(1);
  Scalar series = Scalar(kCoeff[0]);
  for (int i = 1; i < 9; ++i) series += Scalar(kCoeff[i]) / (z + Scalar(i));
  const Scalar t = z + Scalar(7.5);
  return Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) + (z + Scalar(0.5)) * std::log(t) - t +
         std::log(series);
}

template <typename Scalar>
Scalar gamma_fn(Scalar x) {
  return std::exp(log_gamma(x));
}

/// log of rho_k = pi^{k/2} / Gamma(k/2 + 1), the volume of the unit k-ball (k real).
template <typename Scalar>
Scalar log_ball_volume(Scalar k) {
  if (k < Scalar(0)) throw DomainError("ball_volume: k must be non-negative");
  return Scalar(0.5) * k * std::log(std::numbers::pi_v<Scalar>) - log_gamma(Scalar(0.5) * k + Scalar(1));
}

template <typename Scalar>
Scalar ball_volume(Scalar k) {
  return std::exp(log_ball_volume(k));
}

/// a_{n,p} = rho_{n+p} / (rho_2 rho_n rho_{p-1}); makes Gamma_p B^n = B^n.
template <typename Scalar>
Scalar a_np(Scalar n, Scalar p) {
  if (n < Scalar(1) || p < Scalar(1)) throw DomainError("a_np: requires n >= 1, p >= 1");
  return std::exp(log_ball_volume(n + p) - log_ball_volume(Scalar(2)) - log_ball_volume(n) -
                  log_ball_volume(p - Scalar(1)));
}

/// c_{n,p} = (n rho_n)^{1/n} (n rho_n rho_{p-1} / (2 rho_{n+p-2}))^{1/p}.
template <typename Scalar>
Scalar c_np(Scalar n, Scalar p) {
  if (n < Scalar(1) || p < Scalar(1)) throw DomainError("c_np: requires n >= 1, p >= 1");
  const Scalar log_surface = std::log(n) + log_ball_volume(n);
  const Scalar inner =
      log_surface + log_ball_volume(p - Scalar(1)) - std::log(Scalar(2)) - log_ball_volume(n + p - Scalar(2));
  return std::exp(log_surface / n + inner / p);
}

enum class VolumeMode { closed_form, paper_printed, quadrature };

/// Monte-Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// int_{B_+} x_n^a dx over the upper unit half-ball in R^n.
///   closed_form:   pi^{(n-1)/2} Gamma((a+1)/2) / (2 Gamma((n+a+2)/2))
///   paper_printed: same with pi^{(n-2-a)/2}; differs from closed_form by pi^{-(a+1)/2}
///   quadrature:    Monte-Carlo value (1e6 samples, fixed seed)
double weighted_halfball_volume(int n, double a, VolumeMode mode = VolumeMode::closed_form);

/// Monte-Carlo estimate of the weighted half-ball volume.
Estimate weighted_halfball_volume_mc(int n, double a, std::int64_t samples, std::uint64_t seed);

/// Exponent tuple (n, p, q, a, alpha) shared by every inequality.
struct Params {
  int n = 3;
  double p = 2.0;
  double a = 0.0;
  std::optional<double> alpha;

  /// Conjugate exponent; +infinity when p == 1.
  double q() const {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
  }
  double dim_a() const { return n + a; }
  /// p_a^* = (n+a) p / (n+a-p)
  double p_star() const { return (n + a) * p / (n + a - p); }
  /// Largest admissible Gagliardo-Nirenberg exponent (n+a)/(n+a-p).
  double alpha_max() const { return (n + a) / (n + a - p); }

  /// Throws DomainError unless n >= 2, a >= 0, 1 <= p < n + a.
  void validate_sobolev() const;
  /// Sobolev range plus 0 < alpha <= alpha_max, alpha != 1.
  void validate_gn() const;
  /// n >= 2, a >= 0, p >= 1 (no upper bound on p).
  void validate_entropy() const;

  std::string to_string() const;
};

}  // namespace affsob
