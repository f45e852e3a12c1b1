#pragma once

// Test functions on the half-space R_+ x R^{n-1} with weight t^a, their weighted
// norms, the affine energy E_p and the derived objects alpha_f, D_f^*, C_f^*,
// C_f, L_f, K_f.
//
// A test function is a profile F(z) on the half-space in frame coordinates
// z = (u, v) = (lambda t, B (x - x0)), times a scalar c. Pullbacks by block
// matrices diag(lambda', B') only change the frame, so every function keeps a
// well scaled integration grid.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affsob/convex_geometry.hpp"
#include "affsob/quadrature.hpp"
#include "affsob/scalar_kernel.hpp"

namespace affsob {

/// Value and gradient of a profile at z; grad is (dF/du, grad_v F).
struct ProfileJet {
  double value = 0.0;
  Eigen::VectorXd grad;
};

struct Profile {
  std::string family;
  std::string params;  // canonical parameter string, part of the digest
  int n = 3;
  std::function<ProfileJet(const Eigen::VectorXd& z)> eval;
  double decay = 0.0;       // |F(z)| <~ (1+|z|)^{-decay}; inf for faster than any power
  double grad_decay = 0.0;  // same for |grad F|
  bool smooth = true;
  // geometry hints, frame coordinates
  std::function<std::vector<double>(double phi, const Eigen::VectorXd& omega)> ray_breaks;
  std::vector<double> phi_breaks;
  double support_radius = std::numeric_limits<double>::infinity();
};

/// Pointwise derivatives in original coordinates.
struct Jet {
  double f = 0.0;
  double ft = 0.0;
  Eigen::VectorXd gx;  // spatial gradient, n-1 entries
};

struct TestFunction {
  std::shared_ptr<const Profile> profile;
  Frame frame;  // lambda > 0, B invertible ((n-1) x (n-1)), x0
  double c = 1.0;

  int n() const { return profile->n; }
  Jet jet(const Eigen::VectorXd& y) const;
  double value(const Eigen::VectorXd& y) const { return jet(y).f; }
  double dt(const Eigen::VectorXd& y) const { return jet(y).ft; }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& y) const { return jet(y).gx; }
  HalfSpaceGeometry geometry() const;
  /// Stable text identifying family, parameters, frame and scale (17 digits).
  std::string describe() const;
  /// 64-bit hash of describe(), hex.
  std::string digest() const;
};

// ---------------------------------------------------------------------------
// Families. rho(z) = |u|^q + |v|^q with q = p/(p-1).

TestFunction sobolev_extremal(const Params& params, double c = 1.0, const Frame& frame = {});
/// alpha > 1: (1 + rho)^{1/(1-alpha)}; alpha < 1: (1 - rho)_+^{1/(1-alpha)}.
TestFunction gn_extremal(const Params& params, double c = 1.0, const Frame& frame = {});
TestFunction entropy_extremal(const Params& params, double c = 1.0, const Frame& frame = {});
/// (1 + C(z))^{-(n+a-p)/p}; C on R^n of degree q, with gradient.
TestFunction nguyen_h_pa(const HomogeneousConvexFn& C, const Params& params, double c = 1.0, const Frame& frame = {});
/// (1 + (alpha-1) C(z))_+^{1/(1-alpha)}.
TestFunction nguyen_h_alpha(const HomogeneousConvexFn& C, const Params& params, double c = 1.0,
                            const Frame& frame = {});
/// exp(-C(z)).
TestFunction nguyen_entropy(const HomogeneousConvexFn& C, const Params& params, double c = 1.0,
                            const Frame& frame = {});
/// exp(-u^2 - |v|^2).
TestFunction gaussian(int n, double c = 1.0, const Frame& frame = {});
/// sech(u) prod_j sech(v_j): smooth, x-anisotropic (L_f is not an ellipse).
TestFunction sech_product(int n, double c = 1.0, const Frame& frame = {});

enum class IndicatorShape { cylinder, ball };
/// Smoothed indicator with transition width eps (quintic smoothstep):
/// cylinder {0 < u < 1, |v| < 1} or half-ball {|z| < 1}.
TestFunction indicator_smoothed(int n, double eps, IndicatorShape shape = IndicatorShape::cylinder, double c = 1.0,
                                const Frame& frame = {});

/// f_A(t, x) = f(lambda t, B x).
TestFunction affine_pullback(const TestFunction& f, double lambda, const Eigen::MatrixXd& B);
TestFunction scaled(const TestFunction& f, double c);

// ---------------------------------------------------------------------------
// Evaluation on a node set.

struct FunctionalOptions {
  HalfSpaceRule rule;           // n and a are overwritten from the function / params
  int xi_resolution = 0;        // S^{n-2} rule for directions; 0 = default per n
  double degeneracy_ratio = 1e-12;
};

/// Default S^{n-2} resolution: 1 pair (n=2), 256 nodes (n=3), 18 x 36 product (n=4).
int default_xi_resolution(int n);

/// The function sampled at the nodes of a half-space rule.
struct EvaluatedFunction {
  TestFunction fn;
  double a = 0.0;
  HalfSpaceNodes nodes;
  Eigen::VectorXd f, ft;
  Eigen::MatrixXd gx;  // (n-1) x N
  FunctionalOptions options;
  int n() const { return fn.n(); }
};

EvaluatedFunction evaluate(const TestFunction& f, double a, const FunctionalOptions& options = {});
/// Multiply the sampled function by s (no re-evaluation).
EvaluatedFunction scaled(const EvaluatedFunction& ev, double s);

/// ||f||_{L^r_w}
IntegralEstimate weighted_norm(const EvaluatedFunction& ev, double r);
IntegralEstimate dt_norm(const EvaluatedFunction& ev, double p);
IntegralEstimate directional_norm(const EvaluatedFunction& ev, const Eigen::VectorXd& xi, double p);
IntegralEstimate full_spatial_norm(const EvaluatedFunction& ev, double p);
/// int |f|^p log |f|^p w; requires ||f||_p = 1 within 1e-8 (NormalizationError).
IntegralEstimate entropy(const EvaluatedFunction& ev, double p);

/// Directional norms on the S^{n-2} rule and everything derived from them.
struct AffineData {
  double p = 2.0;
  SphereRule xi;
  Eigen::VectorXd dir_norm;  // ||grad_xi f||_p per node
  double Z = 0.0;            // Z_p(f)
  double E = 0.0;            // E_p(f) = c_{n-1,p} Z_p(f)
  double rel_err = 0.0;      // relative error estimate of Z and E
  double T = 0.0;            // ||df/dt||_p
  double T_rel_err = 0.0;
};
AffineData affine_data(const EvaluatedFunction& ev, double p);

double Z_p(const EvaluatedFunction& ev, double p);
double E_p(const EvaluatedFunction& ev, double p);
/// p ((1+a)/(n-1)) Z^{1-n} ||f_t||^{-p}; p > 1.
double alpha_f(const AffineData& ad, int n, double a);

/// D_f^*(x) = int_{S^{n-2}} ||grad_xi f||^{1-n-p} |<x,xi>|^p dxi.
double Df_star(const AffineData& ad, const Eigen::VectorXd& x);
/// C_f^*(t,x) = alpha_f |t|^p / p + D_f^*(x), degree p on R^n.
HomogeneousConvexFn Cf_star(const AffineData& ad, int n, double a);
/// Numerical Legendre transform of C_f^* (degree q).
HomogeneousConvexFn Cf(const AffineData& ad, int n, double a);
/// D_f^* as a function on R^{n-1} and its Legendre transform D_f.
HomogeneousConvexFn Df_star_fn(const AffineData& ad, int n);
HomogeneousConvexFn Df(const AffineData& ad, int n);
/// L_f = {xi : ||grad_xi f||_p <= 1} in R^{n-1}.
ConvexBody Lf_body(const EvaluatedFunction& ev, const AffineData& ad);
/// K_f = {C_f <= 1} in R^n and its slice K_{f,0} = {D_f <= 1} in R^{n-1}.
ConvexBody Kf_body(const AffineData& ad, int n, double a);
ConvexBody Kf0_body(const AffineData& ad, int n);

/// int C^*(grad f) w for a degree-p function on R^n evaluated at (f_t, grad_x f).
IntegralEstimate energy_integral(const EvaluatedFunction& ev, const HomogeneousConvexFn& Cstar);
/// int D_f^*(grad_x f) w.
IntegralEstimate Df_star_energy(const EvaluatedFunction& ev, const AffineData& ad);

/// int_{K_+} t^a dy for K = {C <= 1}, C of degree q on R^n (radial cubature).
double weighted_half_volume(const HomogeneousConvexFn& C, double a, int phi_level = 5, int sphere_resolution = 64);

}  // namespace affsob
