#include <cmath>
#include <numbers>

#include "affsob/errors.hpp"
#include "affsob/quadrature.hpp"
#include "affsob/scalar_kernel.hpp"
#include "doctest.h"

using namespace affsob;
using Eigen::VectorXd;
constexpr double pi = std::numbers::pi;

TEST_CASE("1-D rules") {
  std::vector<double> x, w;
  gauss_legendre_nodes(10, x, w);
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += w[i] * std::pow(x[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
  auto ts = tanh_sinh(0.0, 1.0, 4);
  double v = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) v += ts.w[i] / std::sqrt(ts.x[i]);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-7));  // inverse square-root endpoint
  auto es = exp_sinh(0.0, 4);
  double e = 0.0;
  for (std::size_t i = 0; i < es.size(); ++i) e += es.w[i] * std::pow(1.0 + es.x[i], -2.5);
  CHECK(e == doctest::Approx(1.0 / 1.5).epsilon(1e-9));
}

TEST_CASE("sphere rules") {
  auto r0 = sphere_rule(0, 1);
  CHECK(r0.size() == 2);
  CHECK(r0.nodes(0, 0) == 1.0);
  CHECK(r0.nodes(0, 1) == -1.0);
  CHECK(r0.weights.sum() == 2.0);
  CHECK(sphere_measure(0) == doctest::Approx(2.0));

  auto r1 = sphere_rule(1, 8);
  CHECK(integrate_sphere(r1, [](const VectorXd&) { return 1.0; }) == doctest::Approx(2.0 * pi).epsilon(1e-14));
  CHECK(integrate_sphere(r1, [](const VectorXd&) { return 3.5; }) == doctest::Approx(7.0 * pi).epsilon(1e-14));
  CHECK(integrate_sphere(r1, [](const VectorXd& xi) { return xi(0) * xi(0); }) == doctest::Approx(pi).epsilon(1e-14));

  auto r2 = sphere_rule(2, 12);
  CHECK(integrate_sphere(r2, [](const VectorXd& xi) { return xi(2) * xi(2); }) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-10));
  CHECK(r2.weights.sum() == doctest::Approx(4.0 * pi).epsilon(1e-13));
  CHECK(r2.weights_coarse.sum() == doctest::Approx(4.0 * pi).epsilon(1e-13));

  auto r3 = sphere_rule(3, 500);
  CHECK(r3.weights.sum() == doctest::Approx(sphere_measure(3)).epsilon(1e-13));

  for (const auto* r : {&r0, &r1, &r2, &r3}) {
    for (Eigen::Index i = 0; i < r->size(); ++i) {
      CHECK(r->weights(i) > 0.0);
      CHECK((r->nodes.col(i) + r->nodes.col(r->antipode[i])).norm() < 1e-12);
    }
    auto g = [](const VectorXd& xi) { return std::exp(xi(0)) * (1.0 + xi.sum() * xi.sum()); };
    auto gm = [&](const VectorXd& xi) { return g(-xi); };
    CHECK(integrate_sphere(*r, g) == integrate_sphere(*r, gm));
  }
  CHECK_THROWS_AS(sphere_rule(1, 0), DomainError);
  CHECK_THROWS_AS(integrate_sphere(r1, [](const VectorXd& xi) { return xi(0) > 0.99 ? NAN : 1.0; }), NonFiniteValue);
}

TEST_CASE("half-sphere rule gives weighted half-ball volumes") {
  for (int n : {2, 3, 4})
    for (double a : {0.0, 0.5, 2.0}) {
      auto hs = halfsphere_rule(n, 4, 12);
      double v = 0.0;
      for (Eigen::Index i = 0; i < hs.weights.size(); ++i) v += hs.weights(i) * std::pow(hs.cos_phi(i), a);
      CHECK(v / (n + a) == doctest::Approx(weighted_halfball_volume(n, a)).epsilon(1e-10));
    }
}

TEST_CASE("half-space polar scheme") {
  HalfSpaceRule rule;
  rule.n = 2;
  rule.a = 0.0;
  auto g = [](const VectorXd& y) { return std::exp(-y(0) - y(1) * y(1)); };
  auto e = integrate_halfspace(rule, g, 1e9);
  CHECK(e.value == doctest::Approx(std::sqrt(pi)).epsilon(1e-8));
  CHECK(e.err_estimate < 1e-4);
  auto g2 = [&](const VectorXd& y) { return 2.0 * g(y); };
  CHECK(integrate_halfspace(rule, g2, 1e9).value == 2.0 * e.value);

  for (int n : {2, 3})
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      HalfSpaceRule r;
      r.n = n;
      r.a = a;
      HalfSpaceGeometry geo;
      geo.ray_breaks = [](double, const VectorXd&) { return std::vector<double>{1.0}; };
      auto ind = [](const VectorXd& y) { return y.squaredNorm() <= 1.0 ? 1.0 : 0.0; };
      auto est = integrate_halfspace(r, ind, 1e9, geo);
      CHECK(std::abs(est.value - weighted_halfball_volume(n, a)) <= est.err_estimate + 1e-12);
      CHECK(est.value == doctest::Approx(weighted_halfball_volume(n, a)).epsilon(1e-10));
    }
}

TEST_CASE("half-space frames and alternative schemes") {
  // Gaussian in a non-trivial frame: int e^{-(lambda t)^2 - |B(x-x0)|^2} t dt dx over n = 3
  HalfSpaceRule rule;
  rule.n = 3;
  rule.a = 1.0;
  HalfSpaceGeometry geo;
  geo.frame.lambda = 1.7;
  geo.frame.B = (Eigen::MatrixXd(2, 2) << 1.2, 0.3, -0.4, 0.9).finished();
  geo.frame.x0 = (VectorXd(2) << 0.5, -1.0).finished();
  const Eigen::MatrixXd B = geo.frame.B;
  const VectorXd x0 = geo.frame.x0;
  auto g = [&](const VectorXd& y) {
    const VectorXd v = B * (y.tail(2) - x0);
    return std::exp(-std::pow(1.7 * y(0), 2) - v.squaredNorm());
  };
  const double exact = 0.5 / (1.7 * 1.7) * pi / std::abs(B.determinant());
  for (auto scheme : {HalfSpaceScheme::polar, HalfSpaceScheme::map_to_cube, HalfSpaceScheme::tensor_gauss}) {
    rule.scheme = scheme;
    rule.level = scheme == HalfSpaceScheme::polar ? 3 : 4;
    rule.truncation_radius = 8.0;
    auto e = integrate_halfspace(rule, g, 1e9, geo);
    CHECK(e.value == doctest::Approx(exact).epsilon(1e-6));
  }
  rule.scheme = HalfSpaceScheme::monte_carlo;
  rule.node_budget = 200000;
  auto e = integrate_halfspace(rule, g, 1e9, geo);
  CHECK(std::abs(e.value - exact) < e.err_estimate);
  auto e2 = integrate_halfspace(rule, g, 1e9, geo);
  CHECK(e.value == e2.value);
}

TEST_CASE("non-integrable and non-finite signals") {
  HalfSpaceRule rule;
  rule.n = 3;
  rule.a = 1.0;
  auto g = [](const VectorXd& y) { return std::pow(1.0 + y.norm(), -3.5); };
  CHECK_THROWS_AS(integrate_halfspace(rule, g, 4.0), NonIntegrable);
  CHECK_NOTHROW(integrate_halfspace(rule, [](const VectorXd& y) { return std::pow(1.0 + y.norm(), -6.0); }, 6.0));
  CHECK_THROWS_AS(integrate_halfspace(rule, [](const VectorXd& y) { return y(0) > 1.0 ? NAN : 0.0; }, 10.0),
                  NonFiniteValue);
}
