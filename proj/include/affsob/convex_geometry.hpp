#pragma once

// Origin-symmetric convex bodies with support/gauge/radial queries, volumes,
// L_p centroid bodies, the Busemann-Petty check, and Legendre transforms of
// even positively homogeneous convex functions.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace affsob {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// {z : |B z| <= 1}. In dimension 1 this is the interval [-1/|b|, 1/|b|].
struct Ellipsoid {
  Eigen::MatrixXd B;
};

/// Convex polygon, vertices in counter-clockwise order, origin in the interior.
struct Polygon {
  Eigen::Matrix2Xd vertices;
};

/// {z : ||z||_q <= scale}, 1 <= q <= inf.
struct LqBall {
  int dim = 2;
  double q = 2.0;
  double scale = 1.0;
};

/// Body known only through a positively 1-homogeneous gauge.
struct GaugeBody {
  int dim = 2;
  ScalarField gauge;
};

/// Body known only through its support function.
struct SupportBody {
  int dim = 2;
  ScalarField support;
};

/// Planar body with radial function sampled at angles 2 pi k / N. Off-grid values: the
/// trigonometric interpolant tabulated on an 8N grid, then periodic cubic interpolation.
struct Tabulated2D {
  Eigen::VectorXd radial;
};

namespace detail {
struct BodyImpl;
}

/// Immutable, cheap to copy. Derived data (inverse matrices, edge normals,
/// direction grids for gauge-only bodies) is computed once and shared.
class ConvexBody {
 public:
  using Rep = std::variant<Ellipsoid, Polygon, LqBall, GaugeBody, SupportBody, Tabulated2D>;

  explicit ConvexBody(Rep rep);
  int dim() const;
  const Rep& rep() const;

  static ConvexBody ball(int d, double radius = 1.0);
  static ConvexBody cube(int d, double half_side = 1.0);

  const detail::BodyImpl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const detail::BodyImpl> impl_;
};

double support(const ConvexBody& body, const Eigen::VectorXd& y);
double gauge(const ConvexBody& body, const Eigen::VectorXd& y);
double radial(const ConvexBody& body, const Eigen::VectorXd& y);
ConvexBody polar(const ConvexBody& body);
double volume(const ConvexBody& body);
/// A K = {A z : z in K} for invertible A.
ConvexBody linear_image(const ConvexBody& body, const Eigen::MatrixXd& A);

/// int_K |<y,z>|^p dz.
double moment(const ConvexBody& body, const Eigen::VectorXd& y, double p);

/// L_p centroid body: h^p(y) = (1 / (a_{d,p} vol K)) int_K |<y,z>|^p dz.
/// Ellipsoids map to ellipsoids, p = 2 always yields an ellipsoid (second moments).
ConvexBody centroid_body(const ConvexBody& body, double p);

struct BpResult {
  double vol_K = 0.0;
  double vol_GpK = 0.0;
  double ratio = 0.0;
  bool pass = false;
};
BpResult bp_check(const ConvexBody& body, double p, double tol = 1e-9);

/// Maximize F over the unit sphere S^{d-1} (optionally restricted to <y,theta> > 0):
/// grid scan then local refinement. Returns the maximizing direction.
struct SphereMax {
  Eigen::VectorXd argmax;
  double value = 0.0;
};
SphereMax maximize_on_sphere(int d, const ScalarField& F, const Eigen::VectorXd* halfspace = nullptr);

/// Even, positive, positively `degree`-homogeneous convex function on R^dim.
struct HomogeneousConvexFn {
  int dim = 2;
  double degree = 2.0;
  ScalarField eval;
  /// Optional analytic gradient; test functions built on C need it.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

/// C(y) = ||B y||_r^q / q together with its closed-form conjugate
/// C*(y) = ||B^{-T} y||_{r'}^p / p, both with gradients.
struct ConjugatePair {
  HomogeneousConvexFn C;
  HomogeneousConvexFn Cstar;
};
ConjugatePair norm_power_pair(const Eigen::MatrixXd& B, double q, double r = 2.0);

/// C* for C of degree q > 1: C*(y) = sup_{theta in S^{d-1}, <y,theta> > 0} <y,theta>^p (q C(theta))^{1-p} / p.
/// The result caches C on a direction grid; evaluation refines locally per query.
HomogeneousConvexFn legendre_transform(const HomogeneousConvexFn& C);

/// K_C with gauge C^{1/q}.
ConvexBody body_from_C(const HomogeneousConvexFn& C);

/// Spot checks of the gauge axioms on random directions (homogeneity, symmetry, midpoint convexity).
bool check_gauge_axioms(const ConvexBody& body, int samples, std::uint64_t seed, double tol = 1e-8);

class CounterRng;
/// Random origin-symmetric polygon: 3..7 vertex pairs at jittered angles, radii in [0.5, 1.5], convex hull.
ConvexBody random_symmetric_polygon(CounterRng& rng);

}  // namespace affsob
