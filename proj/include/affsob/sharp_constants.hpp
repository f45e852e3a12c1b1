#pragma once

// Sharp constants of the classical and affine weighted inequalities. Every
// affine constant is available in two independently coded forms: the defining
// product of its factors and a fully simplified closed form.

#include <optional>
#include <string>
#include <string_view>

#include "affsob/scalar_kernel.hpp"

namespace affsob {

enum class ConstantName {
  S_bgl,
  S_crs,
  S_nguyen,
  G_nguyen,
  N_nguyen,
  L_nguyen,
  R_cal,
  S_cal,
  K_cal,
  G_cal,
  N_cal,
  L_cal
};

std::string_view to_string(ConstantName name);
std::optional<ConstantName> constant_from_string(std::string_view s);

struct ConstantValue {
  ConstantName name{};
  Params params;
  double defining = 0.0;
  double simplified = 0.0;
  double rel_gap = 0.0;
  bool flagged = false;    // rel_gap > 1e-10
  bool is_limit = false;   // p == 1 value obtained by extrapolation
  std::string notes;
};

/// S(n,a): weighted Sobolev constant for p = 2 (requires n + a > 2).
double bgl_constant(int n, double a);

/// S(n,p,a): weighted L^p Sobolev constant, using the selected half-ball volume.
double crs_constant(int n, double p, double a, VolumeMode volume_mode = VolumeMode::closed_form);

/// S(n,a,p): norm-dependent Sobolev constant (includes the p^{1/p} q^{1/q} prefactor).
double nguyen_sobolev_constant(int n, double p, double a);

enum class GnCase { a, b };

struct GnExponents {
  double theta = 0.0;
  double beta_or_gamma = 0.0;  // beta for case a, gamma for case b
  double theta_printed = 0.0;  // case b: the variant with n in place of n + a
};

/// theta and beta/gamma. Case b uses the dilation-consistent denominator
/// (n+a - alpha(n+a-p)); the variant with n alone is returned in theta_printed.
GnExponents gn_exponents(const Params& params, GnCase which);

/// G_{n,a}(alpha,p) (case a) or N_{n,a}(alpha,p) (case b).
double nguyen_gn_constant(const Params& params, GnCase which);

/// L_{n,a}(p), p > 1.
double nguyen_entropy_constant(int n, double p, double a);

/// Both forms of the named constant. For the affine constants at p == 1 the
/// extrapolated limit is returned in both fields with is_limit set.
ConstantValue constant_value(ConstantName name, const Params& params);

/// Convenience: the value used by the verifier (defining form, or the limit at p == 1).
double affine_constant(ConstantName name, const Params& params);

/// Limit p -> 1+ of S_cal, G_cal, N_cal, L_cal by extrapolation in
/// h = p - 1 over {1e-3, 1e-4, 1e-5} with model c0 + c1 h + c2 h log h.
/// Throws NonConvergence if the fitted limit is inconsistent with the samples.
double limit_p_to_1(ConstantName name, int n, double a, std::optional<double> alpha = std::nullopt);

/// Factor missing from the printed Gagliardo-Nirenberg and entropy constants,
/// as measured at their extremals: (p^{1/p} q^{1/q})^k with k = theta for
/// G_nguyen, N_nguyen; 1 for G_cal, N_cal; p for L_nguyen, L_cal. 1 for the
/// other names and at p == 1.
double extremal_correction(ConstantName name, const Params& params);

/// Ratio of the printed half-ball volume to the derived one (pi^{-(a+1)/2}).
double halfball_printed_ratio(int n, double a);

}  // namespace affsob
