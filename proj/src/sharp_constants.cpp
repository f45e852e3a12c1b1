#include "affsob/sharp_constants.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>

namespace affsob {
namespace {

constexpr double kLogPi = 1.1447298858494002;  // log(pi)
constexpr double kGapThreshold = 1e-10;

double lg(double x) {
  if (!(x > 0.0)) throw DomainError("Gamma argument must be positive (parameters outside admissible range)");
  return log_gamma(x);
}

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

struct Ex {
  double n, p, q, a, m;
};

Ex unpack(const Params& pr) {
  if (!(pr.p > 1.0)) throw DomainError("p must exceed 1 for this form");
  if (pr.n < 2) throw DomainError("n must be >= 2");
  if (!(pr.a >= 0.0)) throw DomainError("a must be >= 0");
  if (!(pr.p < pr.n + pr.a)) throw DomainError("p must be < n + a");
  return {double(pr.n), pr.p, pr.p / (pr.p - 1.0), pr.a, pr.n + pr.a};
}

double log_nguyen_S(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  return std::log(p) / p + std::log(q) / q +
         ((p - 1.0) * std::log(p - 1.0) - std::log(m) - (p - 1.0) * std::log(m - p)) / p -
         (lg(m / p) + lg(m * (p - 1.0) / p + 1.0) - lg(m)) / m;
}

// R_cal: defining product of its factors.
double log_R_defining(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  const double an = a_np(n - 1.0, p);
  const double cn = c_np(n - 1.0, p);
  return -xlogy((1.0 + a) / (p * m), 1.0 + a) - std::log(q) / q +
         (std::log(n - 1.0) + std::log(q) + lg((m + q) / q) - lg((1.0 + a) / q) - lg((n - 1.0 + q) / q)) / m -
         std::log(p / m) / p - (n - 1.0) / (p * m) * std::log((n + p - 1.0) * an) - (n - 1.0) / m * std::log(cn);
}

double log_common_tail(const Ex& e) {
  // -(n-1)/(2m) log pi - (1+a)/(pm) log(1+a) - (n-1)/(pm) log(n-1)
  const auto [n, p, q, a, m] = e;
  return -(n - 1.0) / (2.0 * m) * kLogPi - xlogy((1.0 + a) / (p * m), 1.0 + a) - xlogy((n - 1.0) / (p * m), n - 1.0);
}

double log_R_simplified(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  return -std::log(q) / q + log_common_tail(e) + std::log(m / p) / p +
         (std::log(q) + lg((n + 1.0) / 2.0) + lg((m + q) / q) - lg((1.0 + a) / q) - lg((n - 1.0 + q) / q)) / m;
}

double log_S_simplified(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  return log_common_tail(e) - std::log((m - p) / (p - 1.0)) / q +
         (std::log(q) + lg((n + 1.0) / 2.0) + lg(m) - lg((1.0 + a) / q) - lg((n - 1.0 + q) / q) - lg(m / p)) / m;
}

// K_cal through the norm-dependent inequality with C = |t|^q/q + |x|^q/q.
double log_K_second(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  const double log_I = lg((1.0 + a) / q) + lg((n - 1.0 + q) / q) - std::log(q) - lg((m + q) / q);
  const double log_body = m / q * std::log(q) + log_ball_volume(n - 1.0) + log_I;
  return log_nguyen_S(e) - std::log(p) / p - log_body / m;
}

double theta_a(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  return m * (al - 1.0) / (al * (n * p + a * p - (al * p + 1.0 - al) * (m - p)));
}

double theta_b(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  return m * (1.0 - al) / ((al * p + 1.0 - al) * (m - al * (m - p)));
}

double theta_b_printed(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  return m * (1.0 - al) / ((al * p + 1.0 - al) * (n - al * (n - p)));
}

double log_G_nguyen(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  const double th = theta_a(e, al);
  const double b = (al * (p - 1.0) + 1.0) / (al - 1.0);
  return th / p * std::log(b * std::pow(al - 1.0, p) / (m * std::pow(q, p - 1.0))) +
         std::log((q * b - m) / (q * b)) / (al * p) + th / m * (lg(b) - lg(b - m / q) - lg(m / q + 1.0));
}

double log_N_nguyen(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  const double th = theta_b(e, al);
  const double g = (al * (p - 1.0) + 1.0) / (1.0 - al);
  return th / p * std::log(g * std::pow(1.0 - al, p) / (m * std::pow(q, p - 1.0))) +
         (1.0 - th) / (al * p) * std::log(q * g / (q * g + m)) +
         th / m * (lg(g + 1.0 + m / q) - lg(g + 1.0) - lg(m / q + 1.0));
}

double log_G_simplified(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  const double th = theta_a(e, al);
  const double r = p * al / (al - 1.0);
  return -std::log(p) / p - (1.0 / q + 1.0) * std::log(q) + std::log(al - 1.0) / q + log_common_tail(e) +
         std::log(al * p + q) / p + std::log((-al * m + m + al * p + q) / (al * p + q)) / (al * th * p) +
         (std::log(q) + lg((n + 1.0) / 2.0) + lg(r - 1.0) - lg((1.0 + a) / q) - lg(n / q + 1.0 / p) -
          lg(r - m / q - 1.0)) /
             m;
}

double log_N_simplified(const Ex& e, double al) {
  const auto [n, p, q, a, m] = e;
  const double th = theta_b(e, al);
  const double r = p * al / (al - 1.0);
  const double k = (th - 1.0) / (al * th * p);
  return -std::log(p) / p - std::log(q) / q + log_common_tail(e) +
         (-k + 1.0 / p) * std::log(1.0 - al * (1.0 - p)) + (k + 1.0 / q) * std::log((1.0 - al) / q) +
         k * std::log(m + (al * p + q) / (1.0 - al)) -
         (lg((1.0 + a) / q) + lg(2.0 - r) + lg(n / q + 1.0 / p) - std::log(q) - lg((n + 1.0) / 2.0) -
          lg(-r + m / q + 2.0)) /
             m;
}

double log_L_nguyen(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  return std::log(p / m) + (p - 1.0) * (std::log(p - 1.0) - 1.0) - p / m * lg((m + q) / q);
}

double log_L_simplified(const Ex& e) {
  const auto [n, p, q, a, m] = e;
  return (1.0 - p) + (p - 1.0) * std::log(p) - xlogy((1.0 + a) / m, 1.0 + a) - xlogy((n - 1.0) / m, n - 1.0) +
         (2.0 - 2.0 * p) * std::log(q) - (n - 1.0) * p / (2.0 * m) * kLogPi +
         p / m * (std::log(q) + lg((n + 1.0) / 2.0) - lg((1.0 + a) / q) - lg((n - 1.0 + q) / q));
}

double require_alpha(const Params& pr, bool greater_than_one) {
  if (!pr.alpha) throw DomainError("alpha required");
  const double al = *pr.alpha;
  if (greater_than_one ? !(al > 1.0) : !(al > 0.0 && al < 1.0))
    throw DomainError(greater_than_one ? "case a requires alpha > 1" : "case b requires 0 < alpha < 1");
  return al;
}

bool is_affine(ConstantName name) {
  switch (name) {
    case ConstantName::R_cal:
    case ConstantName::S_cal:
    case ConstantName::K_cal:
    case ConstantName::G_cal:
    case ConstantName::N_cal:
    case ConstantName::L_cal:
      return true;
    default:
      return false;
  }
}

// Both forms, p > 1, no alpha range check beyond the sign of alpha - 1 and
// positivity of all Gamma arguments (used by the p -> 1 extrapolation).
std::pair<double, double> affine_pair(ConstantName name, const Params& pr) {
  const Ex e = unpack(pr);
  const double logR = log_R_defining(e);
  switch (name) {
    case ConstantName::R_cal:
      return {std::exp(logR), std::exp(log_R_simplified(e))};
    case ConstantName::S_cal:
      return {std::exp(log_nguyen_S(e) + logR), std::exp(log_S_simplified(e))};
    case ConstantName::K_cal: {
      const double adj = xlogy((1.0 + e.a) / (e.p * e.m), 1.0 + e.a) + xlogy((e.n - 1.0) / (e.p * e.m), e.n - 1.0) -
                         std::log(e.m) / e.p;
      return {std::exp(log_nguyen_S(e) + logR + adj), std::exp(log_K_second(e))};
    }
    case ConstantName::G_cal: {
      const double al = require_alpha(pr, true);
      return {std::exp(log_G_nguyen(e, al) / theta_a(e, al) + logR), std::exp(log_G_simplified(e, al))};
    }
    case ConstantName::N_cal: {
      const double al = require_alpha(pr, false);
      return {std::exp(log_N_nguyen(e, al) / theta_b(e, al) + logR), std::exp(log_N_simplified(e, al))};
    }
    case ConstantName::L_cal:
      return {std::exp(log_L_nguyen(e) + e.p * logR), std::exp(log_L_simplified(e))};
    default:
      break;
  }
  throw DomainError("not an affine constant");
}

}  // namespace

std::string_view to_string(ConstantName name) {
  switch (name) {
    case ConstantName::S_bgl: return "S_bgl";
    case ConstantName::S_crs: return "S_crs";
    case ConstantName::S_nguyen: return "S_nguyen";
    case ConstantName::G_nguyen: return "G_nguyen";
    case ConstantName::N_nguyen: return "N_nguyen";
    case ConstantName::L_nguyen: return "L_nguyen";
    case ConstantName::R_cal: return "R_cal";
    case ConstantName::S_cal: return "S_cal";
    case ConstantName::K_cal: return "K_cal";
    case ConstantName::G_cal: return "G_cal";
    case ConstantName::N_cal: return "N_cal";
    case ConstantName::L_cal: return "L_cal";
  }
  return "?";
}

std::optional<ConstantName> constant_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ConstantName::L_cal); ++i) {
    const auto c = static_cast<ConstantName>(i);
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

double bgl_constant(int n, double a) {
  const double m = n + a;
  if (n < 2 || a < 0.0 || !(m > 2.0)) throw DomainError("bgl_constant: requires n >= 2, a >= 0, n + a > 2");
  const double log_inner = std::log(2.0) + 0.5 * (1.0 + a) * kLogPi + lg(m) - lg(0.5 * (1.0 + a)) - lg(0.5 * m);
  return std::exp(-0.5 * (kLogPi + std::log(m) + std::log(m - 2.0)) + log_inner / m);
}

double crs_constant(int n, double p, double a, VolumeMode volume_mode) {
  const Ex e = unpack(Params{n, p, a, std::nullopt});
  const double m = e.m;
  const double V = weighted_halfball_volume(n, a, volume_mode);
  const double log_first = ((p - 1.0) * std::log(p - 1.0) - std::log(m) - (p - 1.0) * std::log(m - p)) / p;
  const double log_second = (lg(m) - lg(m * (p - 1.0) / p + 1.0) - lg(m / p) - std::log(V)) / m;
  return std::exp(log_first + log_second);
}

double nguyen_sobolev_constant(int n, double p, double a) { return std::exp(log_nguyen_S(unpack(Params{n, p, a, {}}))); }

GnExponents gn_exponents(const Params& params, GnCase which) {
  params.validate_gn();
  const double al = *params.alpha;
  const double p = params.p;
  Ex e{double(params.n), p, params.q(), params.a, params.dim_a()};
  GnExponents out;
  if (which == GnCase::a) {
    if (!(al > 1.0)) throw DomainError("case a requires alpha > 1");
    out.theta = theta_a(e, al);
    out.theta_printed = out.theta;
    out.beta_or_gamma = (al * (p - 1.0) + 1.0) / (al - 1.0);
  } else {
    if (!(al < 1.0)) throw DomainError("case b requires alpha < 1");
    out.theta = theta_b(e, al);
    out.theta_printed = theta_b_printed(e, al);
    out.beta_or_gamma = (al * (p - 1.0) + 1.0) / (1.0 - al);
  }
  return out;
}

double nguyen_gn_constant(const Params& params, GnCase which) {
  params.validate_gn();
  const Ex e = unpack(params);
  if (which == GnCase::a) return std::exp(log_G_nguyen(e, require_alpha(params, true)));
  return std::exp(log_N_nguyen(e, require_alpha(params, false)));
}

double nguyen_entropy_constant(int n, double p, double a) {
  if (!(p > 1.0)) throw DomainError("nguyen_entropy_constant: requires p > 1");
  if (n < 2 || a < 0.0) throw DomainError("nguyen_entropy_constant: requires n >= 2, a >= 0");
  Ex e{double(n), p, p / (p - 1.0), a, n + a};
  return std::exp(log_L_nguyen(e));
}

double halfball_printed_ratio(int n, double a) {
  return weighted_halfball_volume(n, a, VolumeMode::paper_printed) /
         weighted_halfball_volume(n, a, VolumeMode::closed_form);
}

ConstantValue constant_value(ConstantName name, const Params& params) {
  ConstantValue cv;
  cv.name = name;
  cv.params = params;
  const int n = params.n;
  const double p = params.p, a = params.a;
  switch (name) {
    case ConstantName::S_bgl:
      cv.defining = bgl_constant(n, a);
      cv.simplified = crs_constant(n, 2.0, a);
      cv.notes = "simplified = S(n,2,a)";
      break;
    case ConstantName::S_crs: {
      cv.defining = crs_constant(n, p, a);
      const double q = params.q();
      cv.simplified = nguyen_sobolev_constant(n, p, a) * std::pow(p, -1.0 / p) * std::pow(q, -1.0 / q) *
                      std::pow(weighted_halfball_volume(n, a), -1.0 / (n + a));
      cv.notes = "simplified = S(n,a,p) p^{-1/p} q^{-1/q} V^{-1/(n+a)}";
      break;
    }
    case ConstantName::S_nguyen:
      cv.defining = cv.simplified = nguyen_sobolev_constant(n, p, a);
      cv.notes = "single form";
      break;
    case ConstantName::G_nguyen:
      cv.defining = cv.simplified = nguyen_gn_constant(params, GnCase::a);
      cv.notes = "single form";
      break;
    case ConstantName::N_nguyen:
      cv.defining = cv.simplified = nguyen_gn_constant(params, GnCase::b);
      cv.notes = "single form";
      break;
    case ConstantName::L_nguyen:
      cv.defining = cv.simplified = nguyen_entropy_constant(n, p, a);
      cv.notes = "single form";
      break;
    default:
      if (p == 1.0) {
        cv.defining = cv.simplified = limit_p_to_1(name, n, a, params.alpha);
        cv.is_limit = true;
        cv.notes = "limit p->1+";
      } else {
        if (name == ConstantName::G_cal || name == ConstantName::N_cal) params.validate_gn();
        std::tie(cv.defining, cv.simplified) = affine_pair(name, params);
      }
      break;
  }
  cv.rel_gap = std::abs(cv.defining - cv.simplified) / std::abs(cv.defining);
  cv.flagged = !(cv.rel_gap <= kGapThreshold);
  return cv;
}

double affine_constant(ConstantName name, const Params& params) {
  if (!is_affine(name)) return constant_value(name, params).defining;
  if (params.p == 1.0) return limit_p_to_1(name, params.n, params.a, params.alpha);
  if (name == ConstantName::G_cal || name == ConstantName::N_cal) params.validate_gn();
  return affine_pair(name, params).first;
}

double limit_p_to_1(ConstantName name, int n, double a, std::optional<double> alpha) {
  if (!is_affine(name)) throw DomainError("limit_p_to_1: affine constants only");
  if (n < 2 || a < 0.0 || !(n + a > 1.0)) throw DomainError("limit_p_to_1: requires n >= 2, a >= 0");
  constexpr std::array<double, 3> hs = {1e-3, 1e-4, 1e-5};
  Eigen::Matrix3d M;
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    const double h = hs[i];
    M(i, 0) = 1.0;
    M(i, 1) = h;
    M(i, 2) = h * std::log(h);
    v(i) = affine_pair(name, Params{n, 1.0 + h, a, alpha}).first;
  }
  const Eigen::Vector3d c = M.fullPivLu().solve(v);
  const double limit = c(0);
  // The fitted limit must sit within the spread suggested by the last step.
  const double last_step = std::abs(v(2) - v(1));
  if (!std::isfinite(limit) || !(limit > 0.0) || std::abs(limit - v(2)) > 10.0 * last_step + 1e-12)
    throw NonConvergence(std::string("limit_p_to_1: extrapolation inconsistent for ") + std::string(to_string(name)));
  return limit;
}

double extremal_correction(ConstantName name, const Params& params) {
  const double p = params.p;
  if (p == 1.0) return 1.0;
  const double q = params.q();
  const double k = std::log(p) / p + std::log(q) / q;
  switch (name) {
    case ConstantName::G_nguyen:
      return std::exp(k * gn_exponents(params, GnCase::a).theta);
    case ConstantName::N_nguyen:
      return std::exp(k * gn_exponents(params, GnCase::b).theta);
    case ConstantName::G_cal:
    case ConstantName::N_cal:
      return std::exp(k);
    case ConstantName::L_nguyen:
    case ConstantName::L_cal:
      return std::exp(k * p);
    default:
      return 1.0;
  }
}

}  // namespace affsob
