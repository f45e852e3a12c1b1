#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "affsob/errors.hpp"
#include "affsob/functionals.hpp"
#include "affsob/random.hpp"
#include "affsob/verifier.hpp"
#include "doctest.h"

using namespace affsob;
using std::numbers::pi;

namespace {

Eigen::VectorXd point(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Eigen::VectorXd unit2(double th) { return point({std::cos(th), std::sin(th)}); }

double sphere_area(int d) { return d * ball_volume(double(d)); }  // |S^{d-1}|

}  // namespace

TEST_CASE("analytic derivatives match central differences") {
  CounterRng rng(11);
  const Params P3{3, 1.5, 1.0, std::nullopt};
  Params Pg = P3;
  Pg.alpha = 1.2;
  Eigen::MatrixXd CB(3, 3);
  CB << 1.0, 0.2, 0.0, 0.1, 0.8, 0.3, 0.0, 0.0, 1.1;
  const std::vector<TestFunction> fns = {
      sobolev_extremal(P3, 1.0, random_frame(3, 5)), gn_extremal(Pg, 2.0, random_frame(3, 6)),
      entropy_extremal(P3, 1.0, random_frame(3, 7)), gaussian(3, 1.0, random_frame(3, 8)),
      sech_product(3, 0.5, random_frame(3, 9)),      nguyen_h_pa(norm_power_pair(CB, P3.q()).C, P3, 1.0, random_frame(3, 10))};
  const double h = 1e-4;
  for (const auto& f : fns) {
    CAPTURE(f.describe());
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd y = point({rng.uniform(0.05, 1.5), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)});
      const Jet J = f.jet(y);
      Eigen::VectorXd fd(3);
      for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
        e(i) = h;
        fd(i) = (f.value(y + e) - f.value(y - e)) / (2 * h);
      }
      Eigen::VectorXd an(3);
      an << J.ft, J.gx;
      CHECK((an - fd).norm() <= 1e-5 * std::max(1.0, an.norm()));
    }
  }
}

TEST_CASE("weighted norms") {
  // e^{-t^2-x^2}, n = 2, a = 0, r = 2: sqrt(pi)/2
  const EvaluatedFunction g = evaluate(gaussian(2), 0.0);
  CHECK(weighted_norm(g, 2.0).value == doctest::Approx(std::sqrt(pi) / 2).epsilon(1e-8));
  // separable oracle with a = 1, r = 3
  const EvaluatedFunction g1 = evaluate(gaussian(2), 1.0);
  const double ref = std::pow(1.0 / (2 * 3.0) * std::sqrt(pi / 3.0), 1.0 / 3.0);
  CHECK(weighted_norm(g1, 3.0).value == doctest::Approx(ref).epsilon(1e-8));
  // homogeneity
  const EvaluatedFunction s = evaluate(sech_product(3), 1.0);
  CHECK(weighted_norm(scaled(s, -3.0), 2.5).value == doctest::Approx(3.0 * weighted_norm(s, 2.5).value).epsilon(1e-14));
  // smoothed indicator of the half ball: c V^{1/r} + O(eps)
  const double eps = 0.01, c = 1.7;
  const EvaluatedFunction ind = evaluate(indicator_smoothed(3, eps, IndicatorShape::ball, c), 1.0);
  CHECK(weighted_norm(ind, 2.0).value == doctest::Approx(c * std::sqrt(weighted_halfball_volume(3, 1.0))).epsilon(2e-2));
}

TEST_CASE("directional norms") {
  const EvaluatedFunction g = evaluate(gaussian(3), 1.0);
  const double d0 = directional_norm(g, unit2(0.0), 1.5).value;
  for (int k = 1; k < 8; ++k) CHECK(directional_norm(g, unit2(k * pi / 4), 1.5).value == doctest::Approx(d0).epsilon(1e-8));
  const EvaluatedFunction s = evaluate(sech_product(3, 1.0, random_frame(3, 3)), 0.0);
  const double full = full_spatial_norm(s, 2.5).value;
  for (int k = 0; k < 8; ++k) {
    const Eigen::VectorXd xi = unit2(0.3 + k * pi / 4);
    const double d = directional_norm(s, xi, 2.5).value;
    CHECK(d == doctest::Approx(directional_norm(s, -xi, 2.5).value).epsilon(1e-14));
    CHECK(d <= full);
  }
}

TEST_CASE("affine energy") {
  // n = 2: E_p = ||df/dx|| exactly
  for (double p : {1.5, 2.0, 3.0}) {
    const EvaluatedFunction s = evaluate(sech_product(2, 1.0, random_frame(2, 4)), 1.0);
    const AffineData ad = affine_data(s, p);
    CHECK(ad.E == doctest::Approx(full_spatial_norm(s, p).value).epsilon(1e-12));
  }
  // x-radial at n = 3: Z = c |S^1|^{1/(1-n)}
  const EvaluatedFunction g = evaluate(gaussian(3), 0.0);
  const AffineData ad = affine_data(g, 2.0);
  const double c = directional_norm(g, unit2(0.0), 2.0).value;
  CHECK(ad.Z == doctest::Approx(c * std::pow(sphere_area(2), -0.5)).epsilon(1e-10));
  CHECK(alpha_f(ad, 3, 0.0) > 0.0);
}

TEST_CASE("entropy") {
  // normalized Gaussian: -(n+a)/2 - log M
  for (double a : {0.0, 1.0}) {
    const int n = 3;
    const double p = 2.0;
    const EvaluatedFunction g = evaluate(gaussian(n), a);
    const EvaluatedFunction gn = scaled(g, 1.0 / weighted_norm(g, p).value);
    const double M = boost::math::tgamma((a + 1) / 2) / (2 * std::pow(p, (a + 1) / 2)) * std::pow(pi / p, (n - 1) / 2.0);
    CHECK(entropy(gn, p).value == doctest::Approx(-(n + a) / 2 - std::log(M)).epsilon(1e-6));
    // translation in x
    Frame fr;
    fr.x0 = point({0.4, -0.3});
    const EvaluatedFunction h = evaluate(gaussian(n, 1.0, fr), a);
    const EvaluatedFunction hn = scaled(h, 1.0 / weighted_norm(h, p).value);
    CHECK(entropy(hn, p).value == doctest::Approx(entropy(gn, p).value).epsilon(1e-10));
  }
  // uniform density on the half ball
  const EvaluatedFunction ind = evaluate(indicator_smoothed(3, 0.005, IndicatorShape::ball), 1.0);
  const EvaluatedFunction un = scaled(ind, 1.0 / weighted_norm(ind, 2.0).value);
  CHECK(entropy(un, 2.0).value == doctest::Approx(-std::log(weighted_halfball_volume(3, 1.0))).epsilon(2e-2));
  CHECK_THROWS_AS(entropy(ind, 2.0), NormalizationError);
}

TEST_CASE("alpha_f scaling") {
  const Params P{3, 1.5, 1.0, std::nullopt};
  const TestFunction f = sech_product(3, 1.0, random_frame(3, 12));
  const double a0 = alpha_f(affine_data(evaluate(f, P.a), P.p), 3, P.a);
  const double c = 2.5;
  const double a1 = alpha_f(affine_data(evaluate(scaled(f, c), P.a), P.p), 3, P.a);
  CHECK(a1 == doctest::Approx(a0 * std::pow(c, 1.0 - 3 - P.p)).epsilon(1e-12));
}

TEST_CASE("C_f* homogeneity and evenness") {
  const Params P{3, 3.0, 1.0, std::nullopt};
  const AffineData ad = affine_data(evaluate(sech_product(3, 1.0, random_frame(3, 2)), P.a), P.p);
  const HomogeneousConvexFn Cs = Cf_star(ad, 3, P.a);
  CounterRng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd y = point({rng.normal(), rng.normal(), rng.normal()});
    const double s = rng.uniform(0.2, 3.0);
    CHECK(Cs.eval(s * y) == doctest::Approx(std::pow(s, P.p) * Cs.eval(y)).epsilon(1e-10));
    CHECK(Cs.eval(-y) == doctest::Approx(Cs.eval(y)).epsilon(1e-12));
  }
}

TEST_CASE("slices of K_f scale with t") {
  const Params P{3, 1.5, 0.0, std::nullopt};
  const double q = P.q();
  const AffineData ad = affine_data(evaluate(sech_product(3), P.a), P.p);
  const HomogeneousConvexFn C = Cf(ad, 3, P.a);
  const double al = alpha_f(ad, 3, P.a);
  const double tmax = std::pow(q / std::pow(al, 1.0 - q), 1.0 / q);  // slice vanishes here
  auto slice_radius = [&](double t, const Eigen::VectorXd& u) {
    double lo = 0.0, hi = 1.0;
    auto inside = [&](double r) { return C.eval(point({t, r * u(0), r * u(1)})) <= 1.0; };
    while (inside(hi)) hi *= 2;
    for (int i = 0; i < 50; ++i) (inside(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
    return 0.5 * (lo + hi);
  };
  for (double th : {0.1, 0.9, 2.0}) {
    const Eigen::VectorXd u = unit2(th);
    const double r0 = slice_radius(0.0, u);
    for (double frac : {0.3, 0.7}) {
      const double t = frac * tmax;
      const double pred = std::pow(1.0 - std::pow(al, 1.0 - q) / q * std::pow(t, q), 1.0 / q) * r0;
      CHECK(slice_radius(t, u) == doctest::Approx(pred).epsilon(1e-4));
    }
  }
}

TEST_CASE("x-ellipsoidal functions have ellipsoidal K_{f,0}") {
  const Params P{3, 1.5, 1.0, std::nullopt};
  Frame fr;
  fr.B.resize(2, 2);
  fr.B << 1.4, 0.3, -0.2, 0.7;
  const AffineData ad = affine_data(evaluate(gaussian(3, 1.0, fr), P.a), P.p);
  const ConvexBody K0 = Kf0_body(ad, 3);
  const double ref = gauge(K0, unit2(0.0)) / (fr.B * unit2(0.0)).norm();
  for (int k = 1; k < 12; ++k) {
    const Eigen::VectorXd u = unit2(k * pi / 12);
    CHECK(gauge(K0, u) / (fr.B * u).norm() == doctest::Approx(ref).epsilon(1e-4));
  }
}

TEST_CASE("affine pullback") {
  const Params P{3, 2.0, 1.0, std::nullopt};
  const TestFunction f = sech_product(3, 1.0, random_frame(3, 21));
  const TestFunction same = affine_pullback(f, 1.0, Eigen::MatrixXd::Identity(2, 2));
  const Eigen::VectorXd y = point({0.3, -0.2, 0.5});
  CHECK(same.value(y) == doctest::Approx(f.value(y)).epsilon(1e-15));

  const auto [lambda, B] = random_block(3, 99);
  const TestFunction fa = affine_pullback(f, lambda, B);
  CHECK(fa.value(y) == doctest::Approx(f.value(point({lambda * y(0), (B * y.tail(2))(0), (B * y.tail(2))(1)}))).epsilon(1e-14));
  const double detA = lambda * B.determinant();
  const EvaluatedFunction ev = evaluate(f, P.a), eva = evaluate(fa, P.a);
  const double ps = P.p_star();
  CHECK(weighted_norm(eva, ps).value ==
        doctest::Approx(std::pow(std::pow(lambda, P.a) * detA, -(3 + P.a - P.p) / ((3 + P.a) * P.p)) * weighted_norm(ev, ps).value)
            .epsilon(1e-8));
  CHECK(affine_data(eva, P.p).E == doctest::Approx(std::pow(lambda, -P.a / P.p) * std::pow(detA, -1.0 / P.p) *
                                                   std::pow(B.determinant(), 0.5) * affine_data(ev, P.p).E)
                                       .epsilon(1e-8));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(sobolev_extremal(Params{2, 2.0, 0.0, std::nullopt}), DomainError);
  CHECK_THROWS_AS(affine_pullback(gaussian(3), 1.0, Eigen::MatrixXd::Zero(2, 2)), DomainError);
  CHECK_THROWS_AS(affine_pullback(gaussian(3), -1.0, Eigen::MatrixXd::Identity(2, 2)), DomainError);
}
