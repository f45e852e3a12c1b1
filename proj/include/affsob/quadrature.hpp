#pragma once

// Deterministic integration rules: 1-D building blocks, rules on the spheres
// S^d, and node sets for the weighted half-space R_+ x R^{n-1} with t^a dt dx.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace affsob {

/// Compensated (Neumaier) accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// 1-D rule with an embedded coarse rule (coarse weights are zero on nodes the
/// coarse rule does not use).
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> w_coarse;
  std::size_t size() const { return x.size(); }
};

/// m-point Gauss-Legendre on [lo, hi]; the coarse rule is the ceil(m/2)-point rule
/// evaluated separately (its nodes are appended with zero fine weight).
Rule1D gauss_legendre(int m, double lo, double hi);
/// Plain m-point Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre_nodes(int m, std::vector<double>& x, std::vector<double>& w);

/// Adaptive Gauss-Kronrod (7/15) on [lo, hi] with interval bisection; handles
/// isolated kinks. Throws NonConvergence if the interval budget is exhausted.
double adaptive_gk(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-13,
                   int max_intervals = 2000);

/// Double-exponential rule on the finite interval [lo, hi], step h = 2^{-level}.
Rule1D tanh_sinh(double lo, double hi, int level);
/// Double-exponential rule on [lo, +inf), step h = 2^{-level}; nodes span
/// lo + exp(pi/2 sinh s) for s in [-s_low, 4.5].
Rule1D exp_sinh(double lo, int level, double s_low = 4.5);

struct SphereRule {
  int sphere_dim = 0;        // d, the rule lives on S^d in R^{d+1}
  Eigen::MatrixXd nodes;     // (d+1) x N, unit columns, closed under negation
  Eigen::VectorXd weights;   // positive, sum = |S^d| (|S^0| = 2)
  Eigen::VectorXd weights_coarse;
  std::vector<Eigen::Index> antipode;  // column of -nodes.col(i)
  int resolution = 0;
  int exact_degree = 0;      // -1 for Monte Carlo rules
  Eigen::Index size() const { return nodes.cols(); }
};

/// Surface measure of S^d (2 for d = 0).
double sphere_measure(int d);

/// d = 0: {+1,-1} with unit weights; d = 1: trapezoid with 2*resolution nodes;
/// d = 2: Gauss-Legendre (resolution nodes) x trapezoid (2*resolution nodes);
/// d >= 3: antipodally symmetrized Monte Carlo with 2*resolution nodes.
SphereRule sphere_rule(int d, int resolution, std::uint64_t seed = 0x5EED5EEDULL);

/// sum_i w_i g(xi_i), accumulated over antipodal pairs so that g and g(-.)
/// give bit-identical results. Throws NonFiniteValue naming the node on NaN/inf.
double integrate_sphere(const SphereRule& rule, const std::function<double(const Eigen::VectorXd&)>& g);

/// Directions on the open upper half of S^{n-1} (first coordinate > 0) with
/// weights for the surface measure: tanh-sinh in the polar angle phi in (0, pi/2)
/// times a rule on S^{n-2}. Used for weighted volumes of half-bodies.
struct HalfSphereRule {
  Eigen::MatrixXd nodes;    // n x N
  Eigen::VectorXd weights;
  Eigen::VectorXd weights_coarse;
  Eigen::VectorXd cos_phi;  // first coordinate of each node
};
HalfSphereRule halfsphere_rule(int n, int phi_level, int sphere_resolution);

/// Affine frame of a half-space integrand: integration happens in
/// z = (u, v) = (lambda t, B (x - x0)), where the integrand is well scaled.
struct Frame {
  double lambda = 1.0;
  Eigen::MatrixXd B;   // (n-1) x (n-1); empty means identity
  Eigen::VectorXd x0;  // empty means 0
};

/// Geometry hints for the polar scheme, all in frame coordinates z.
struct HalfSpaceGeometry {
  Frame frame;
  /// Radii along the ray z = r (cos phi, sin phi omega) where the integrand has a kink/cut.
  std::function<std::vector<double>(double phi, const Eigen::VectorXd& omega)> ray_breaks;
  /// Polar angles in (0, pi/2) where the ray break structure changes.
  std::vector<double> phi_breaks;
  /// Radius (frame coordinates) outside which the integrand vanishes; inf if none.
  double support_radius = std::numeric_limits<double>::infinity();
};

enum class HalfSpaceScheme { polar, tensor_gauss, monte_carlo, map_to_cube };

struct HalfSpaceRule {
  int n = 3;
  double a = 0.0;
  HalfSpaceScheme scheme = HalfSpaceScheme::polar;
  int level = 3;                    // polar: DE step 2^{-level}; tensor/cube: GL points = 8 * 2^{level-2}
  int sphere_resolution = 16;       // S^{n-2} rule for the spatial direction (polar)
  double truncation_radius = 40.0;  // tensor_gauss / monte_carlo
  std::int64_t node_budget = 200000;
  std::uint64_t seed = 0x5EEDULL;
};

/// Node set in original coordinates y = (t, x), weights include t^a and all Jacobians.
struct HalfSpaceNodes {
  int n = 0;
  double a = 0.0;
  Eigen::MatrixXd points;  // n x N
  Eigen::VectorXd weights;
  Eigen::VectorXd weights_coarse;  // embedded coarse rule (zeros where unused)
  double tail_fraction = 0.0;      // relative truncation bound (tensor / MC)
  bool stochastic = false;
  bool double_exponential = false;
  Eigen::Index size() const { return points.cols(); }
};

/// Build nodes. decay_hint = s with |g(y)| <~ (1+|y|)^{-s}; requires s > n + a
/// unless the geometry has finite support_radius. Throws NonIntegrable.
HalfSpaceNodes halfspace_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geometry, double decay_hint);

struct IntegralEstimate {
  double value = 0.0;
  double err_estimate = 0.0;
};

/// Integrate precomputed samples g_i at the nodes.
IntegralEstimate integrate_samples(const HalfSpaceNodes& nodes, const Eigen::VectorXd& samples);

/// int g(t,x) t^a dt dx. Throws NonFiniteValue with the location on NaN/inf.
IntegralEstimate integrate_halfspace(const HalfSpaceRule& rule, const std::function<double(const Eigen::VectorXd&)>& g,
                                     double decay_hint, const HalfSpaceGeometry& geometry = {});

/// Run body(i) for i in [0, count) on up to AFFSOB_THREADS workers. Each index
/// writes only its own output slot, so results do not depend on thread count.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body);
int worker_count();

}  // namespace affsob
