#include <doctest.h>

#include <cmath>
#include <numbers>

#include "affsob/convex_geometry.hpp"
#include "affsob/errors.hpp"
#include "affsob/random.hpp"
#include "affsob/scalar_kernel.hpp"

using namespace affsob;
using std::numbers::pi;

namespace {

Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd random_unit(CounterRng& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  return v.normalized();
}

ConvexBody square() { return ConvexBody::cube(2); }

}  // namespace

TEST_CASE("support examples") {
  const auto ball = ConvexBody::ball(3);
  Eigen::VectorXd y(3);
  y << 0.3, -1.2, 2.0;
  CHECK(support(ball, y) == doctest::Approx(y.norm()).epsilon(1e-14));
  CHECK(support(square(), v2(1, 1)) == doctest::Approx(2.0));

  Eigen::Matrix2d B;
  B << 2.0, 0.5, -0.3, 1.0;
  const ConvexBody ell(Ellipsoid{B});
  const Eigen::VectorXd w = v2(0.7, -1.1);
  CHECK(support(ell, w) == doctest::Approx((B.inverse().transpose() * w).norm()).epsilon(1e-14));

  // the same ellipse seen only through its gauge: grid + refine
  const ConvexBody g(GaugeBody{2, [B](const Eigen::VectorXd& z) { return (B * z).norm(); }});
  CHECK(support(g, w) == doctest::Approx(support(ell, w)).epsilon(1e-10));
  Eigen::Matrix3d B3;
  B3 << 1.0, 0.2, 0.0, 0.0, 2.0, 0.3, 0.1, 0.0, 0.7;
  const ConvexBody g3(GaugeBody{3, [B3](const Eigen::VectorXd& z) { return (B3 * z).norm(); }});
  CHECK(support(g3, y) == doctest::Approx((B3.inverse().transpose() * y).norm()).epsilon(1e-9));
}

TEST_CASE("gauge and radial") {
  const auto b2 = ConvexBody::ball(2, 2.0);
  CHECK(gauge(b2, v2(3, 4)) == doctest::Approx(2.5));
  CHECK(radial(b2, v2(0.6, 0.8)) == doctest::Approx(2.0));
  CHECK(gauge(b2, v2(3, 4)) * radial(b2, v2(3, 4)) == doctest::Approx(1.0));

  // tabulated round trip on a smooth body
  const int N = 64;
  Eigen::VectorXd r(N);
  for (int k = 0; k < N; ++k) r(k) = 1.0 + 0.2 * std::cos(2.0 * (2 * pi * k / N));
  const ConvexBody tab(Tabulated2D{r});
  for (int k = 0; k < N; ++k) {
    const double th = 2 * pi * k / N;
    CHECK(radial(tab, v2(std::cos(th), std::sin(th))) == doctest::Approx(r(k)).epsilon(1e-12));
  }
  // off-grid: cubic interpolation of the trigonometric interpolant
  const double th = 0.123;
  CHECK(radial(tab, v2(std::cos(th), std::sin(th))) ==
        doctest::Approx(1.0 + 0.2 * std::cos(2 * th)).epsilon(1e-7));
  CHECK_THROWS_AS(ConvexBody(Tabulated2D{Eigen::VectorXd::Constant(5, 1.0)}), DomainError);
}

TEST_CASE("polar examples") {
  const auto p2 = polar(ConvexBody::ball(2, 2.0));
  CHECK(radial(p2, v2(0, 1)) == doctest::Approx(0.5));
  const auto cross = polar(square());
  CHECK(radial(cross, v2(1, 0)) == doctest::Approx(1.0));
  CHECK(radial(cross, v2(1, 1).normalized()) == doctest::Approx(std::sqrt(0.5)));
  CHECK(volume(cross) == doctest::Approx(2.0));

  Eigen::Matrix2d B;
  B << 1.5, 0.4, 0.0, 0.8;
  const ConvexBody ell(Ellipsoid{B});
  const auto pe = polar(ell);
  CounterRng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto u = random_unit(rng, 2);
    CHECK(gauge(pe, u) == doctest::Approx(support(ell, u)).epsilon(1e-13));
  }
  // involution through a generic (gauge-only) representation
  const ConvexBody g(GaugeBody{2, [](const Eigen::VectorXd& z) { return std::pow(std::pow(std::abs(z(0)), 3) + std::pow(std::abs(z(1)), 3), 1.0 / 3); }});
  const auto gg = polar(polar(g));
  for (int i = 0; i < 20; ++i) {
    const auto u = random_unit(rng, 2);
    CHECK(radial(gg, u) == doctest::Approx(radial(g, u)).epsilon(1e-8));
  }
}

TEST_CASE("h_K equals r of the polar on random directions") {
  CounterRng rng(3);
  Eigen::Matrix2d B;
  B << 1.0, 0.3, 0.2, 2.0;
  const std::vector<ConvexBody> bodies = {ConvexBody::ball(2, 1.7), square(), ConvexBody(Ellipsoid{B}),
                                          ConvexBody(LqBall{2, 3.0, 1.2}), random_symmetric_polygon(rng)};
  for (const auto& K : bodies) {
    const auto Kp = polar(K);
    for (int i = 0; i < 1000; ++i) {
      const auto u = random_unit(rng, 2);
      CHECK(support(K, u) == doctest::Approx(radial(Kp, u) == 0 ? 0 : 1.0 / radial(Kp, u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("volume examples") {
  CHECK(volume(ConvexBody::ball(2)) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(volume(square()) == doctest::Approx(4.0).epsilon(1e-12));
  Eigen::Matrix2d B = Eigen::Vector2d(0.5, 1.0 / 3.0).asDiagonal();
  CHECK(volume(ConvexBody(Ellipsoid{B})) == doctest::Approx(6 * pi).epsilon(1e-12));
  CHECK(volume(ConvexBody::cube(3)) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(volume(ConvexBody::ball(1, 2.5)) == doctest::Approx(5.0));

  // generic representations, quadrature based
  const ConvexBody disk_g(GaugeBody{2, [](const Eigen::VectorXd& z) { return z.norm(); }});
  CHECK(volume(disk_g) == doctest::Approx(pi).epsilon(1e-12));
  const ConvexBody sq_g(GaugeBody{2, [](const Eigen::VectorXd& z) { return z.cwiseAbs().maxCoeff(); }});
  CHECK(volume(sq_g) == doctest::Approx(4.0).epsilon(1e-8));  // corners: trapezoid on 4096 angles
  const ConvexBody disk_s(SupportBody{2, [](const Eigen::VectorXd& z) { return 1.3 * z.norm(); }});
  CHECK(volume(disk_s) == doctest::Approx(pi * 1.69).epsilon(1e-9));
  const ConvexBody ball3(GaugeBody{3, [](const Eigen::VectorXd& z) { return z.norm(); }});
  CHECK(volume(ball3) == doctest::Approx(4 * pi / 3).epsilon(1e-10));
  CHECK(volume(ConvexBody(LqBall{3, 1.0, 1.0})) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("volume of linear images") {
  CounterRng rng(5);
  for (int i = 0; i < 20; ++i) {
    Eigen::Matrix2d A;
    A << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    if (std::abs(A.determinant()) < 0.1) continue;
    const auto K = random_symmetric_polygon(rng);
    CHECK(volume(linear_image(K, A)) == doctest::Approx(std::abs(A.determinant()) * volume(K)).epsilon(1e-10));
    const ConvexBody L(LqBall{2, 2.5, 1.0});
    CHECK(volume(linear_image(L, A)) == doctest::Approx(std::abs(A.determinant()) * volume(L)).epsilon(1e-6));
  }
}

TEST_CASE("centroid body of the ball is the ball") {
  CounterRng rng(17);
  for (int d = 1; d <= 3; ++d)
    for (double p : {1.0, 2.0, 3.0}) {
      const auto G = centroid_body(ConvexBody::ball(d), p);
      const auto u = random_unit(rng, d);
      CHECK(support(G, u) == doctest::Approx(1.0).epsilon(1e-10));
      // through a representation without closed-form moments
      const ConvexBody gb(GaugeBody{d, [](const Eigen::VectorXd& z) { return z.norm(); }});
      CHECK(support(centroid_body(gb, p), u) == doctest::Approx(1.0).epsilon(1e-6));
    }
  // d = 1: 1/(a_{1,p} (p+1)) = 1
  for (double p : {1.0, 2.0, 3.5}) CHECK(1.0 / (a_np(1.0, p) * (p + 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a_np(1.0, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  const auto G1 = centroid_body(ConvexBody(LqBall{1, 2.0, 0.7}), 2.5);
  CHECK(support(G1, Eigen::VectorXd::Ones(1)) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("centroid body of the square") {
  const auto G = centroid_body(square(), 2.0);
  CHECK(support(G, v2(1, 0)) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(support(G, v2(0.6, 0.8)) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(volume(G) == doctest::Approx(4 * pi / 3).epsilon(1e-12));
  // p = 3 goes through the support representation
  const auto G3 = centroid_body(square(), 3.0);
  const double direct = std::pow(moment(square(), v2(1, 0), 3.0) / (a_np(2.0, 3.0) * 4.0), 1.0 / 3.0);
  CHECK(support(G3, v2(1, 0)) == doctest::Approx(direct).epsilon(1e-13));
  // exact polygon moment vs generic radial quadrature of the same square
  const ConvexBody sq_g(GaugeBody{2, [](const Eigen::VectorXd& z) { return z.cwiseAbs().maxCoeff(); }});
  CHECK(moment(sq_g, v2(0.3, 0.9), 3.0) == doctest::Approx(moment(square(), v2(0.3, 0.9), 3.0)).epsilon(1e-6));
  // int_{[-1,1]^2} x^2 = 4/3
  CHECK(moment(square(), v2(1, 0), 2.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Busemann-Petty checks") {
  for (double p : {1.0, 2.0, 3.0}) {
    const auto r = bp_check(ConvexBody::ball(2), p);
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.pass);
  }
  Eigen::Matrix2d B = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  const auto re = bp_check(ConvexBody(Ellipsoid{B}), 2.0);
  CHECK(re.ratio == doctest::Approx(1.0).epsilon(1e-10));
  // ellipse given as a gauge (no closed form): still equality
  const ConvexBody eg(GaugeBody{2, [B](const Eigen::VectorXd& z) { return (B * z).norm(); }});
  CHECK(bp_check(eg, 3.0).ratio == doctest::Approx(1.0).epsilon(1e-5));

  const auto rs = bp_check(square(), 2.0);
  CHECK(rs.ratio == doctest::Approx(pi / 3).epsilon(1e-12));
  CHECK(rs.pass);

  CounterRng rng(2024);
  int failures = 0;
  double min_ratio = 10.0;
  for (int i = 0; i < 200; ++i) {
    const auto K = random_symmetric_polygon(rng);
    for (double p : {1.0, 2.0, 3.0}) {
      const auto r = bp_check(K, p, 1e-9);
      min_ratio = std::min(min_ratio, r.ratio);
      if (!r.pass) ++failures;
    }
  }
  CHECK(failures == 0);
  CHECK(min_ratio >= 1.0 - 1e-9);
}

TEST_CASE("centroid body equivariance") {
  CounterRng rng(99);
  Eigen::Matrix2d A;
  A << 1.2, 0.4, -0.3, 0.9;
  for (double p : {1.0, 2.0, 3.0}) {
    const auto K = random_symmetric_polygon(rng);
    const auto lhs = centroid_body(linear_image(K, A), p);
    const auto rhs = linear_image(centroid_body(K, p), A);
    for (int i = 0; i < 20; ++i) {
      const auto u = random_unit(rng, 2);
      CHECK(support(lhs, u) == doctest::Approx(support(rhs, u)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Legendre transform") {
  for (double q : {1.5, 2.0, 3.0}) {
    const double p = q / (q - 1.0);
    for (int d : {2, 3}) {
      const HomogeneousConvexFn C{d, q, [q](const Eigen::VectorXd& z) { return std::pow(z.norm(), q) / q; }};
      const auto Cs = legendre_transform(C);
      CHECK(Cs.degree == doctest::Approx(p));
      CounterRng rng(7);
      for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd y = random_unit(rng, d) * rng.uniform(0.5, 2.0);
        CHECK(Cs.eval(y) == doctest::Approx(std::pow(y.norm(), p) / p).epsilon(1e-6));
      }
    }
  }
  // separable: C(t,x) = alpha^{1-q}|t|^q/q + D(x), D = |x|_3^q / q
  const double q = 2.5, p = q / (q - 1.0), alpha = 1.7;
  auto normq = [](const Eigen::VectorXd& x, double r) {
    return std::pow(std::pow(std::abs(x(0)), r) + std::pow(std::abs(x(1)), r), 1.0 / r);
  };
  const HomogeneousConvexFn C{3, q, [&](const Eigen::VectorXd& z) {
                                Eigen::VectorXd x = z.tail(2);
                                return std::pow(alpha, 1 - q) * std::pow(std::abs(z(0)), q) / q + std::pow(normq(x, 3.0), q) / q;
                              }};
  const auto Cs = legendre_transform(C);
  CounterRng rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto y = random_unit(rng, 3);
    Eigen::VectorXd x = y.tail(2);
    // conjugate of |x|_r^q/q is |x|_{r'}^p/p
    const double expect = alpha * std::pow(std::abs(y(0)), p) / p + std::pow(normq(x, 1.5), p) / p;
    CHECK(Cs.eval(y) == doctest::Approx(expect).epsilon(1e-6));
  }
  // biconjugation on a non-Euclidean 2-D example
  const HomogeneousConvexFn D{2, 3.0, [&](const Eigen::VectorXd& z) { return std::pow(normq(z, 4.0), 3.0) / 3.0 + 0.1 * std::pow(z.norm(), 3.0); }};
  const auto Dss = legendre_transform(legendre_transform(D));
  for (int i = 0; i < 10; ++i) {
    const auto y = random_unit(rng, 2);
    CHECK(Dss.eval(y) == doctest::Approx(D.eval(y)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(legendre_transform(HomogeneousConvexFn{2, 1.0, C.eval}), DomainError);
}

TEST_CASE("body from C") {
  const double q = 3.0;
  const auto K1 = body_from_C({2, q, [q](const Eigen::VectorXd& z) { return std::pow(z.norm(), q) / q; }});
  CHECK(radial(K1, v2(0.6, 0.8)) == doctest::Approx(std::pow(q, 1.0 / q)).epsilon(1e-13));
  const auto K2 = body_from_C({2, q, [q](const Eigen::VectorXd& z) { return std::pow(z.norm(), q); }});
  CHECK(radial(K2, v2(0, 1)) == doctest::Approx(1.0));
  Eigen::Matrix2d B;
  B << 2.0, 0.1, 0.3, 0.5;
  const auto K3 = body_from_C({2, q, [q, B](const Eigen::VectorXd& z) { return std::pow((B * z).norm(), q); }});
  const Eigen::VectorXd y = v2(0.4, -1.0);
  CHECK(gauge(K3, y) == doctest::Approx((B * y).norm()).epsilon(1e-13));
  CHECK(volume(K3) == doctest::Approx(pi / std::abs(B.determinant())).epsilon(1e-10));
}

TEST_CASE("gauge axioms") {
  CounterRng rng(1);
  Eigen::Matrix3d B;
  B << 1, 0.2, 0, 0, 1, 0.4, 0.1, 0, 2;
  CHECK(check_gauge_axioms(ConvexBody(Ellipsoid{B}), 200, 1));
  CHECK(check_gauge_axioms(random_symmetric_polygon(rng), 200, 2));
  CHECK(check_gauge_axioms(ConvexBody(LqBall{3, 1.5, 2.0}), 200, 3));
  const ConvexBody bad(GaugeBody{2, [](const Eigen::VectorXd& z) { return std::sqrt(z.cwiseAbs().sum()); }});
  CHECK_FALSE(check_gauge_axioms(bad, 200, 4));
  Eigen::Matrix2Xd cw(2, 4);
  cw << 1, 1, -1, -1, 1, -1, -1, 1;
  CHECK_THROWS_AS(ConvexBody(Polygon{cw}), DomainError);
}
