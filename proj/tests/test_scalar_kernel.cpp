#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "affsob/scalar_kernel.hpp"
#include "doctest.h"

using namespace affsob;
constexpr double pi = std::numbers::pi;

TEST_CASE("log_gamma known values") {
  CHECK(log_gamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-14));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
  // 7.5 by upward recursion from Gamma(1/2)
  double g = std::sqrt(pi);
  for (double x = 0.5; x < 7.4; x += 1.0) g *= x;
  CHECK(std::exp(log_gamma(7.5)) == doctest::Approx(g).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.5), DomainError);
}

TEST_CASE("log_gamma relative accuracy on [1e-3, 1e3]") {
  double worst = 0.0;
  for (double lx = -3.0; lx <= 3.0; lx += 0.0137) {
    const double x = std::pow(10.0, lx);
    const double ref = boost::math::lgamma(x);
    // relative error of exp(result) equals the absolute error of the log
    worst = std::max(worst, std::abs(log_gamma(x) - ref));
  }
  CHECK(worst < 1e-13 * 7.0e3);  // absolute log error scaled by |lnGamma| at 1e3 (~5.9e3)
  double worst_small = 0.0;
  for (double x = 1e-3; x < 30.0; x *= 1.07)
    worst_small = std::max(worst_small, std::abs(gamma_fn(x) / boost::math::tgamma(x) - 1.0));
  CHECK(worst_small < 1e-13);
}

TEST_CASE("ball volumes") {
  CHECK(ball_volume(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ball_volume(2.0) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(ball_volume(3.0) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
  for (double k = 2.0; k < 40.0; k += 0.37)
    CHECK(ball_volume(k) == doctest::Approx(ball_volume(k - 2.0) * 2.0 * pi / k).epsilon(1e-12));
  CHECK_THROWS_AS(ball_volume(-0.1), DomainError);
}

TEST_CASE("a_np and c_np") {
  CHECK(a_np(1.0, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(a_np(2.0, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
  for (double p : {1.0, 1.25, 2.0, 3.7}) CHECK(c_np(1.0, p) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(c_np(2.0, 2.0) == doctest::Approx(2.0 * std::sqrt(pi)).epsilon(1e-14));
  for (double n : {1.0, 2.0, 3.0, 5.0})
    for (double p : {1.0, 1.5, 4.0}) {
      CHECK(a_np(n, p) > 0.0);
      CHECK(c_np(n, p) > 0.0);
    }
}

TEST_CASE("weighted half-ball volume") {
  CHECK(weighted_halfball_volume(3, 0.0) == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-13));
  CHECK(weighted_halfball_volume(2, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  for (int n : {2, 3, 4, 5}) {
    CHECK(weighted_halfball_volume(n, 0.0) == doctest::Approx(ball_volume(double(n)) / 2.0).epsilon(1e-12));
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      // Beta reduction oracle: int_0^1 t^a rho_{n-1} (1-t^2)^{(n-1)/2} dt
      auto g = [&](double t) { return std::pow(t, a) * std::pow(1.0 - t * t, 0.5 * (n - 1)); };
      const double oracle = ball_volume(double(n - 1)) * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 15, 1e-14);
      CHECK(weighted_halfball_volume(n, a) == doctest::Approx(oracle).epsilon(1e-10));
      CHECK(weighted_halfball_volume(n, a, VolumeMode::paper_printed) / weighted_halfball_volume(n, a) ==
            doctest::Approx(std::pow(pi, -(a + 1.0) / 2.0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Monte Carlo half-ball volume agrees within 3 standard errors") {
  for (int n : {2, 3})
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      const Estimate e = weighted_halfball_volume_mc(n, a, 1'000'000, 17);
      CHECK(std::abs(e.value - weighted_halfball_volume(n, a)) < 3.0 * e.std_error);
    }
  CHECK(weighted_halfball_volume(3, 1.0, VolumeMode::quadrature) == weighted_halfball_volume(3, 1.0, VolumeMode::quadrature));
}

TEST_CASE("Params validation") {
  Params ok{3, 2.0, 0.0, {}};
  CHECK_NOTHROW(ok.validate_sobolev());
  CHECK(ok.p_star() == doctest::Approx(6.0));
  CHECK(std::isinf(Params{3, 1.0, 0.0, {}}.q()));
  CHECK_THROWS_AS((Params{3, 3.0, 0.0, {}}.validate_sobolev()), DomainError);
  CHECK_THROWS_AS((Params{1, 1.5, 0.0, {}}.validate_sobolev()), DomainError);
  CHECK_THROWS_AS((Params{3, 2.0, -0.5, {}}.validate_sobolev()), DomainError);
  CHECK_THROWS_AS((Params{3, 2.0, 0.0, 1.0}.validate_gn()), DomainError);
  CHECK_THROWS_AS((Params{3, 2.0, 0.0, 3.5}.validate_gn()), DomainError);
  CHECK_NOTHROW((Params{3, 2.0, 0.0, 3.0}.validate_gn()));
  CHECK_NOTHROW((Params{3, 5.0, 0.0, {}}.validate_entropy()));
}
