#include "affsob/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "affsob/errors.hpp"

namespace affsob {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Frame canonical_frame(const Frame& f, int n) {
  Frame out = f;
  if (!(f.lambda > 0.0)) throw DomainError("frame: lambda must be positive");
  if (out.B.size() == 0) out.B = Eigen::MatrixXd::Identity(n - 1, n - 1);
  if (out.B.rows() != n - 1 || out.B.cols() != n - 1) throw DomainError("frame: B must be (n-1) x (n-1)");
  if (!(std::abs(out.B.determinant()) > 0.0)) throw DomainError("frame: B is singular");
  if (out.x0.size() == 0) out.x0 = Eigen::VectorXd::Zero(n - 1);
  if (out.x0.size() != n - 1) throw DomainError("frame: x0 must have n-1 entries");
  return out;
}

TestFunction make(std::shared_ptr<Profile> prof, double c, const Frame& frame) {
  TestFunction f;
  f.frame = canonical_frame(frame, prof->n);
  f.profile = std::move(prof);
  f.c = c;
  return f;
}

void require_p_gt_1(const Params& params, const char* what) {
  if (!(params.p > 1.0)) throw DomainError(std::string(what) + ": requires p > 1");
}

// rho = |u|^q + |v|^q and its gradient in z.
double rho_and_grad(const Eigen::VectorXd& z, double q, Eigen::VectorXd& g) {
  const int n = static_cast<int>(z.size());
  g.resize(n);
  const double u = z(0);
  const double au = std::abs(u);
  const Eigen::VectorXd v = z.tail(n - 1);
  const double nv = v.norm();
  g(0) = q * std::copysign(std::pow(au, q - 1.0), u);
  if (nv > 0.0)
    g.tail(n - 1) = q * std::pow(nv, q - 2.0) * v;
  else
    g.tail(n - 1).setZero();
  return std::pow(au, q) + std::pow(nv, q);
}

std::string params_text(const Params& p) {
  std::string s = "n=" + std::to_string(p.n) + ",p=" + fmt17(p.p) + ",a=" + fmt17(p.a);
  if (p.alpha) s += ",alpha=" + fmt17(*p.alpha);
  return s;
}

// Ray r where rho(r theta) = level, theta = (cos phi, sin phi omega).
double rho_level_radius(double phi, double q, double level) {
  const double c = std::abs(std::cos(phi)), s = std::abs(std::sin(phi));
  return std::pow(level / (std::pow(c, q) + std::pow(s, q)), 1.0 / q);
}

double smoothstep_down(double s, double eps, double* deriv) {
  // 1 for s <= 1 - eps, 0 for s >= 1, quintic C^2 transition
  if (s <= 1.0 - eps) {
    *deriv = 0.0;
    return 1.0;
  }
  if (s >= 1.0) {
    *deriv = 0.0;
    return 0.0;
  }
  const double w = (s - (1.0 - eps)) / eps;
  const double w2 = w * w;
  *deriv = -30.0 * w2 * (w - 1.0) * (w - 1.0) / eps;
  return 1.0 - w2 * w * (10.0 - 15.0 * w + 6.0 * w2);
}

// Max of ((level / C(theta))^{1/q}) over a direction scan, padded.
double c_level_support(const HomogeneousConvexFn& C, double level) {
  const int n = C.dim;
  const SphereRule r = sphere_rule(n - 1, n == 2 ? 256 : (n == 3 ? 48 : 4000));
  double best = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) best = std::max(best, std::pow(level / C.eval(r.nodes.col(k)), 1.0 / C.degree));
  return 1.25 * best;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------

Jet TestFunction::jet(const Eigen::VectorXd& y) const {
  const int nn = n();
  if (y.size() != nn) throw DomainError("test function: point has wrong dimension");
  Eigen::VectorXd z(nn);
  z(0) = frame.lambda * y(0);
  z.tail(nn - 1) = frame.B * (y.tail(nn - 1) - frame.x0);
  const ProfileJet pj = profile->eval(z);
  Jet j;
  j.f = c * pj.value;
  j.ft = c * frame.lambda * pj.grad(0);
  j.gx = c * (frame.B.transpose() * pj.grad.tail(nn - 1));
  return j;
}

HalfSpaceGeometry TestFunction::geometry() const {
  HalfSpaceGeometry g;
  g.frame = frame;
  g.ray_breaks = profile->ray_breaks;
  g.phi_breaks = profile->phi_breaks;
  g.support_radius = profile->support_radius;
  return g;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  os << profile->family << "(" << profile->params << ")";
  os << ";c=" << fmt17(c) << ";lambda=" << fmt17(frame.lambda) << ";B=[";
  for (Eigen::Index i = 0; i < frame.B.rows(); ++i)
    for (Eigen::Index j = 0; j < frame.B.cols(); ++j) os << (i || j ? "," : "") << fmt17(frame.B(i, j));
  os << "];x0=[";
  for (Eigen::Index i = 0; i < frame.x0.size(); ++i) os << (i ? "," : "") << fmt17(frame.x0(i));
  os << "]";
  return os.str();
}

std::string TestFunction::digest() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(describe())));
  return buf;
}

// ---------------------------------------------------------------------------
// Families

TestFunction sobolev_extremal(const Params& params, double c, const Frame& frame) {
  params.validate_sobolev();
  require_p_gt_1(params, "sobolev_extremal");
  const double q = params.q();
  const double e = -(params.n + params.a - params.p) / params.p;
  auto prof = std::make_shared<Profile>();
  prof->family = "sobolev_extremal";
  prof->params = params_text(params);
  prof->n = params.n;
  prof->eval = [q, e](const Eigen::VectorXd& z) {
    ProfileJet j;
    const double rho = rho_and_grad(z, q, j.grad);
    j.value = std::pow(1.0 + rho, e);
    j.grad *= e * std::pow(1.0 + rho, e - 1.0);
    return j;
  };
  prof->decay = -q * e;
  prof->grad_decay = -q * e + 1.0;
  return make(prof, c, frame);
}

TestFunction gn_extremal(const Params& params, double c, const Frame& frame) {
  params.validate_gn();
  require_p_gt_1(params, "gn_extremal");
  const double q = params.q();
  const double al = *params.alpha;
  const double e = 1.0 / (1.0 - al);
  auto prof = std::make_shared<Profile>();
  prof->family = al > 1.0 ? "gn_a_extremal" : "gn_b_extremal";
  prof->params = params_text(params);
  prof->n = params.n;
  if (al > 1.0) {
    prof->eval = [q, e](const Eigen::VectorXd& z) {
      ProfileJet j;
      const double rho = rho_and_grad(z, q, j.grad);
      j.value = std::pow(1.0 + rho, e);
      j.grad *= e * std::pow(1.0 + rho, e - 1.0);
      return j;
    };
    prof->decay = -q * e;
    prof->grad_decay = -q * e + 1.0;
  } else {
    prof->eval = [q, e](const Eigen::VectorXd& z) {
      ProfileJet j;
      const double rho = rho_and_grad(z, q, j.grad);
      if (rho >= 1.0) {
        j.value = 0.0;
        j.grad.setZero();
        return j;
      }
      j.value = std::pow(1.0 - rho, e);
      j.grad *= -e * std::pow(1.0 - rho, e - 1.0);
      return j;
    };
    prof->smooth = false;
    prof->decay = kInf;
    prof->grad_decay = kInf;
    prof->ray_breaks = [q](double phi, const Eigen::VectorXd&) { return std::vector<double>{rho_level_radius(phi, q, 1.0)}; };
    prof->support_radius = std::max(1.0, std::pow(2.0, 0.5 - 1.0 / q)) * (1.0 + 1e-9);
  }
  return make(prof, c, frame);
}

TestFunction entropy_extremal(const Params& params, double c, const Frame& frame) {
  params.validate_entropy();
  require_p_gt_1(params, "entropy_extremal");
  const double q = params.q();
  auto prof = std::make_shared<Profile>();
  prof->family = "entropy_extremal";
  prof->params = params_text(params);
  prof->n = params.n;
  prof->eval = [q](const Eigen::VectorXd& z) {
    ProfileJet j;
    const double rho = rho_and_grad(z, q, j.grad);
    j.value = std::exp(-rho);
    j.grad *= -j.value;
    return j;
  };
  prof->decay = kInf;
  prof->grad_decay = kInf;
  return make(prof, c, frame);
}

namespace {
void check_C(const HomogeneousConvexFn& C, const Params& params, const char* what) {
  if (C.dim != params.n) throw DomainError(std::string(what) + ": C must live on R^n");
  if (!C.grad) throw DomainError(std::string(what) + ": C needs an analytic gradient");
  if (std::abs(C.degree - params.q()) > 1e-12 * params.q())
    throw DomainError(std::string(what) + ": C must have degree q = p/(p-1)");
}
}  // namespace

TestFunction nguyen_h_pa(const HomogeneousConvexFn& C, const Params& params, double c, const Frame& frame) {
  params.validate_sobolev();
  require_p_gt_1(params, "nguyen_h_pa");
  check_C(C, params, "nguyen_h_pa");
  const double e = -(params.n + params.a - params.p) / params.p;
  auto prof = std::make_shared<Profile>();
  prof->family = "nguyen_h_pa";
  prof->params = params_text(params);
  prof->n = params.n;
  prof->eval = [C, e](const Eigen::VectorXd& z) {
    ProfileJet j;
    const double cz = C.eval(z);
    j.value = std::pow(1.0 + cz, e);
    j.grad = e * std::pow(1.0 + cz, e - 1.0) * C.grad(z);
    return j;
  };
  prof->decay = -C.degree * e;
  prof->grad_decay = prof->decay + 1.0;
  return make(prof, c, frame);
}

TestFunction nguyen_h_alpha(const HomogeneousConvexFn& C, const Params& params, double c, const Frame& frame) {
  params.validate_gn();
  require_p_gt_1(params, "nguyen_h_alpha");
  check_C(C, params, "nguyen_h_alpha");
  const double al = *params.alpha;
  const double e = 1.0 / (1.0 - al);
  auto prof = std::make_shared<Profile>();
  prof->family = "nguyen_h_alpha";
  prof->params = params_text(params);
  prof->n = params.n;
  prof->eval = [C, al, e](const Eigen::VectorXd& z) {
    ProfileJet j;
    const double base = 1.0 + (al - 1.0) * C.eval(z);
    if (base <= 0.0) {
      j.value = 0.0;
      j.grad = Eigen::VectorXd::Zero(z.size());
      return j;
    }
    j.value = std::pow(base, e);
    j.grad = e * std::pow(base, e - 1.0) * (al - 1.0) * C.grad(z);
    return j;
  };
  if (al > 1.0) {
    prof->decay = C.degree / (al - 1.0);
    prof->grad_decay = prof->decay + 1.0;
  } else {
    prof->smooth = false;
    prof->decay = kInf;
    prof->grad_decay = kInf;
    const double level = 1.0 / (1.0 - al);
    const int n = params.n;
    prof->ray_breaks = [C, level, n](double phi, const Eigen::VectorXd& omega) {
      Eigen::VectorXd th(n);
      th(0) = std::cos(phi);
      th.tail(n - 1) = std::sin(phi) * omega;
      return std::vector<double>{std::pow(level / C.eval(th), 1.0 / C.degree)};
    };
    prof->support_radius = c_level_support(C, level);
  }
  return make(prof, c, frame);
}

TestFunction nguyen_entropy(const HomogeneousConvexFn& C, const Params& params, double c, const Frame& frame) {
  params.validate_entropy();
  require_p_gt_1(params, "nguyen_entropy");
  check_C(C, params, "nguyen_entropy");
  auto prof = std::make_shared<Profile>();
  prof->family = "nguyen_entropy";
  prof->params = params_text(params);
  prof->n = params.n;
  prof->eval = [C](const Eigen::VectorXd& z) {
    ProfileJet j;
    j.value = std::exp(-C.eval(z));
    j.grad = -j.value * C.grad(z);
    return j;
  };
  prof->decay = kInf;
  prof->grad_decay = kInf;
  return make(prof, c, frame);
}

TestFunction gaussian(int n, double c, const Frame& frame) {
  if (n < 2) throw DomainError("gaussian: n must be >= 2");
  auto prof = std::make_shared<Profile>();
  prof->family = "gaussian";
  prof->params = "n=" + std::to_string(n);
  prof->n = n;
  prof->eval = [](const Eigen::VectorXd& z) {
    ProfileJet j;
    j.value = std::exp(-z.squaredNorm());
    j.grad = -2.0 * j.value * z;
    return j;
  };
  prof->decay = kInf;
  prof->grad_decay = kInf;
  return make(prof, c, frame);
}

TestFunction sech_product(int n, double c, const Frame& frame) {
  if (n < 2) throw DomainError("sech_product: n must be >= 2");
  auto prof = std::make_shared<Profile>();
  prof->family = "sech_product";
  prof->params = "n=" + std::to_string(n);
  prof->n = n;
  prof->eval = [](const Eigen::VectorXd& z) {
    ProfileJet j;
    double v = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) v /= std::cosh(z(i));
    j.value = v;
    j.grad = -v * z.array().tanh().matrix();
    return j;
  };
  prof->decay = kInf;
  prof->grad_decay = kInf;
  return make(prof, c, frame);
}

TestFunction indicator_smoothed(int n, double eps, IndicatorShape shape, double c, const Frame& frame) {
  if (n < 2) throw DomainError("indicator_smoothed: n must be >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("indicator_smoothed: eps must be in (0, 1)");
  auto prof = std::make_shared<Profile>();
  prof->family = "indicator_smoothed";
  prof->n = n;
  prof->smooth = false;
  prof->decay = kInf;
  prof->grad_decay = kInf;
  if (shape == IndicatorShape::cylinder) {
    prof->params = "n=" + std::to_string(n) + ",eps=" + fmt17(eps) + ",shape=cylinder";
    prof->eval = [eps](const Eigen::VectorXd& z) {
      ProfileJet j;
      const int nn = static_cast<int>(z.size());
      double du = 0.0, dv = 0.0;
      const double nv = z.tail(nn - 1).norm();
      const double fu = smoothstep_down(std::abs(z(0)), eps, &du);
      const double fv = smoothstep_down(nv, eps, &dv);
      j.value = fu * fv;
      j.grad = Eigen::VectorXd::Zero(nn);
      j.grad(0) = std::copysign(du, z(0)) * fv;
      if (nv > 0.0) j.grad.tail(nn - 1) = fu * dv * z.tail(nn - 1) / nv;
      return j;
    };
    const double e1 = 1.0 - eps;
    prof->ray_breaks = [e1](double phi, const Eigen::VectorXd&) {
      const double c0 = std::cos(phi), s0 = std::sin(phi);
      std::vector<double> b;
      if (c0 > 0.0) {
        b.push_back(e1 / c0);
        b.push_back(1.0 / c0);
      }
      if (s0 > 0.0) {
        b.push_back(e1 / s0);
        b.push_back(1.0 / s0);
      }
      return b;
    };
    prof->phi_breaks = {std::atan(e1), 0.25 * kPi, std::atan(1.0 / e1)};
    prof->support_radius = std::sqrt(2.0) * (1.0 + 1e-12);
  } else {
    prof->params = "n=" + std::to_string(n) + ",eps=" + fmt17(eps) + ",shape=ball";
    prof->eval = [eps](const Eigen::VectorXd& z) {
      ProfileJet j;
      double d = 0.0;
      const double r = z.norm();
      j.value = smoothstep_down(r, eps, &d);
      j.grad = r > 0.0 ? Eigen::VectorXd(d * z / r) : Eigen::VectorXd::Zero(z.size());
      return j;
    };
    prof->ray_breaks = [eps](double, const Eigen::VectorXd&) { return std::vector<double>{1.0 - eps}; };
    prof->support_radius = 1.0;
  }
  return make(prof, c, frame);
}

TestFunction affine_pullback(const TestFunction& f, double lambda, const Eigen::MatrixXd& B) {
  const int n = f.n();
  if (!(lambda > 0.0)) throw DomainError("affine_pullback: lambda must be positive");
  if (B.rows() != n - 1 || B.cols() != n - 1) throw DomainError("affine_pullback: B must be (n-1) x (n-1)");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  if (!(std::abs(lu.determinant()) > 0.0)) throw DomainError("affine_pullback: B is singular");
  TestFunction g = f;
  g.frame.lambda = f.frame.lambda * lambda;
  g.frame.B = f.frame.B * B;
  g.frame.x0 = lu.solve(f.frame.x0);
  return g;
}

TestFunction scaled(const TestFunction& f, double c) {
  TestFunction g = f;
  g.c *= c;
  return g;
}

// ---------------------------------------------------------------------------
// Evaluation

int default_xi_resolution(int n) {
  switch (n) {
    case 2:
      return 1;
    case 3:
      return 128;
    case 4:
      return 18;
    default:
      return 500;
  }
}

EvaluatedFunction evaluate(const TestFunction& f, double a, const FunctionalOptions& options) {
  EvaluatedFunction ev;
  ev.fn = f;
  ev.a = a;
  ev.options = options;
  ev.options.rule.n = f.n();
  ev.options.rule.a = a;
  if (ev.options.xi_resolution <= 0) ev.options.xi_resolution = default_xi_resolution(f.n());
  const Profile& pr = *f.profile;
  // node construction only needs an integrability hint; each functional re-checks its own integrand
  const double hint = std::isfinite(pr.decay) ? std::max(pr.decay, f.n() + a + 0.5) : kInf;
  ev.nodes = halfspace_nodes(ev.options.rule, f.geometry(), hint);
  const Eigen::Index N = ev.nodes.size();
  const int n = f.n();
  ev.f.resize(N);
  ev.ft.resize(N);
  ev.gx.resize(n - 1, N);
  parallel_for(N, [&](std::int64_t i) {
    const Jet j = f.jet(ev.nodes.points.col(i));
    ev.f(i) = j.f;
    ev.ft(i) = j.ft;
    ev.gx.col(i) = j.gx;
  });
  for (Eigen::Index i = 0; i < N; ++i)
    if (!std::isfinite(ev.f(i)) || !std::isfinite(ev.ft(i)) || !ev.gx.col(i).allFinite())
      throw NonFiniteValue("evaluate: non-finite jet of " + f.describe());
  return ev;
}

EvaluatedFunction scaled(const EvaluatedFunction& ev, double s) {
  EvaluatedFunction out = ev;
  out.fn = scaled(ev.fn, s);
  out.f *= s;
  out.ft *= s;
  out.gx *= s;
  return out;
}

namespace {

void check_integrable(const EvaluatedFunction& ev, double exponent, const char* what) {
  const Profile& pr = *ev.fn.profile;
  if (std::isfinite(pr.support_radius)) return;
  if (!(exponent > ev.n() + ev.a))
    throw NonIntegrable(std::string(what) + ": integrand decays like |y|^-" + fmt17(exponent) +
                        ", not integrable against t^a on R^n_+ (n+a = " + fmt17(ev.n() + ev.a) + ")");
}

// (int g)^(1/r) with the propagated error
IntegralEstimate root(const IntegralEstimate& I, double r) {
  IntegralEstimate out;
  if (!(I.value > 0.0)) {
    out.value = 0.0;
    out.err_estimate = std::pow(std::max(I.err_estimate, 0.0), 1.0 / r);
    return out;
  }
  out.value = std::pow(I.value, 1.0 / r);
  out.err_estimate = out.value * I.err_estimate / (r * I.value);
  return out;
}

}  // namespace

IntegralEstimate weighted_norm(const EvaluatedFunction& ev, double r) {
  if (!(r > 0.0)) throw DomainError("weighted_norm: r must be positive");
  check_integrable(ev, r * ev.fn.profile->decay, "weighted_norm");
  const Eigen::VectorXd s = ev.f.array().abs().pow(r).matrix();
  return root(integrate_samples(ev.nodes, s), r);
}

IntegralEstimate dt_norm(const EvaluatedFunction& ev, double p) {
  check_integrable(ev, p * ev.fn.profile->grad_decay, "dt_norm");
  const Eigen::VectorXd s = ev.ft.array().abs().pow(p).matrix();
  return root(integrate_samples(ev.nodes, s), p);
}

IntegralEstimate directional_norm(const EvaluatedFunction& ev, const Eigen::VectorXd& xi, double p) {
  if (xi.size() != ev.n() - 1) throw DomainError("directional_norm: xi must have n-1 entries");
  check_integrable(ev, p * ev.fn.profile->grad_decay, "directional_norm");
  const Eigen::VectorXd s = (ev.gx.transpose() * xi).array().abs().pow(p).matrix();
  return root(integrate_samples(ev.nodes, s), p);
}

IntegralEstimate full_spatial_norm(const EvaluatedFunction& ev, double p) {
  check_integrable(ev, p * ev.fn.profile->grad_decay, "full_spatial_norm");
  const Eigen::VectorXd s = ev.gx.colwise().norm().array().pow(p).matrix().transpose();
  return root(integrate_samples(ev.nodes, s), p);
}

IntegralEstimate entropy(const EvaluatedFunction& ev, double p) {
  check_integrable(ev, p * ev.fn.profile->decay * (1.0 - 1e-9), "entropy");
  const IntegralEstimate nrm = weighted_norm(ev, p);
  if (std::abs(nrm.value - 1.0) > 1e-8)
    throw NormalizationError("entropy: ||f||_p = " + fmt17(nrm.value) + ", expected 1");
  Eigen::VectorXd s(ev.f.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double u = std::pow(std::abs(ev.f(i)), p);
    s(i) = u > 0.0 ? u * std::log(u) : 0.0;
  }
  return integrate_samples(ev.nodes, s);
}

AffineData affine_data(const EvaluatedFunction& ev, double p) {
  if (!(p >= 1.0)) throw DomainError("affine_data: p must be >= 1");
  const int n = ev.n();
  check_integrable(ev, p * ev.fn.profile->grad_decay, "affine_data");
  AffineData ad;
  ad.p = p;
  ad.xi = sphere_rule(n - 2, ev.options.xi_resolution);
  const Eigen::Index K = ad.xi.size();
  ad.dir_norm.resize(K);
  Eigen::VectorXd rel(K);
  parallel_for(K, [&](std::int64_t k) {
    const Eigen::VectorXd s = (ev.gx.transpose() * ad.xi.nodes.col(k)).array().abs().pow(p).matrix();
    const IntegralEstimate I = root(integrate_samples(ev.nodes, s), p);
    ad.dir_norm(k) = I.value;
    rel(k) = I.value > 0.0 ? I.err_estimate / I.value : kInf;
  });
  const double mx = ad.dir_norm.maxCoeff();
  if (!(mx > 0.0) || ad.dir_norm.minCoeff() < ev.options.degeneracy_ratio * mx)
    throw DegenerateFunction("affine_data: a directional derivative norm vanishes for " + ev.fn.describe());
  KahanSum fine, coarse;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double v = std::pow(ad.dir_norm(k), 1.0 - n);
    fine.add(ad.xi.weights(k) * v);
    coarse.add(ad.xi.weights_coarse(k) * v);
  }
  ad.Z = std::pow(fine.value(), 1.0 / (1.0 - n));
  const double Zc = std::pow(coarse.value(), 1.0 / (1.0 - n));
  ad.E = c_np(double(n - 1), p) * ad.Z;
  ad.rel_err = rel.maxCoeff() + (n > 3 || ad.xi.exact_degree < 0 ? std::abs(ad.Z - Zc) / ad.Z : 0.0);
  if (n == 3) {
    // periodic trapezoid: the coarse rule difference overstates the error by far; use its square
    const double d = std::abs(ad.Z - Zc) / ad.Z;
    ad.rel_err += std::min(d, 10.0 * d * d);
  }
  const IntegralEstimate T = dt_norm(ev, p);
  ad.T = T.value;
  ad.T_rel_err = T.value > 0.0 ? T.err_estimate / T.value : kInf;
  return ad;
}

double Z_p(const EvaluatedFunction& ev, double p) { return affine_data(ev, p).Z; }
double E_p(const EvaluatedFunction& ev, double p) { return affine_data(ev, p).E; }

double alpha_f(const AffineData& ad, int n, double a) {
  if (!(ad.p > 1.0)) throw DomainError("alpha_f: requires p > 1");
  if (!(ad.T > 0.0)) throw DegenerateFunction("alpha_f: df/dt vanishes");
  return ad.p * (1.0 + a) / (n - 1.0) * std::pow(ad.Z, 1.0 - n) * std::pow(ad.T, -ad.p);
}

double Df_star(const AffineData& ad, const Eigen::VectorXd& x) {
  const Eigen::Index K = ad.xi.size();
  const int n = static_cast<int>(x.size()) + 1;
  if (ad.xi.nodes.rows() != x.size()) throw DomainError("Df_star: x must have n-1 entries");
  KahanSum s;
  for (Eigen::Index k = 0; k < K; ++k)
    s.add(ad.xi.weights(k) * std::pow(ad.dir_norm(k), 1.0 - n - ad.p) *
          std::pow(std::abs(ad.xi.nodes.col(k).dot(x)), ad.p));
  return s.value();
}

namespace {
// Per-node coefficients w_k ||grad_xi_k f||^{1-n-p}.
Eigen::VectorXd df_coeffs(const AffineData& ad, int n) {
  Eigen::VectorXd c(ad.xi.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = ad.xi.weights(k) * std::pow(ad.dir_norm(k), 1.0 - n - ad.p);
  return c;
}
}  // namespace

HomogeneousConvexFn Df_star_fn(const AffineData& ad, int n) {
  const Eigen::VectorXd coef = df_coeffs(ad, n);
  const Eigen::MatrixXd xi = ad.xi.nodes;
  const double p = ad.p;
  HomogeneousConvexFn out;
  out.dim = n - 1;
  out.degree = p;
  out.eval = [coef, xi, p](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = xi.transpose() * x;
    return coef.dot(d.array().abs().pow(p).matrix());
  };
  out.grad = [coef, xi, p](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd d = xi.transpose() * x;
    Eigen::VectorXd w(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) w(k) = coef(k) * p * std::copysign(std::pow(std::abs(d(k)), p - 1.0), d(k));
    return xi * w;
  };
  return out;
}

HomogeneousConvexFn Df(const AffineData& ad, int n) { return legendre_transform(Df_star_fn(ad, n)); }

HomogeneousConvexFn Cf_star(const AffineData& ad, int n, double a) {
  const double al = alpha_f(ad, n, a);
  const HomogeneousConvexFn D = Df_star_fn(ad, n);
  const double p = ad.p;
  HomogeneousConvexFn out;
  out.dim = n;
  out.degree = p;
  out.eval = [al, D, p, n](const Eigen::VectorXd& y) {
    return al * std::pow(std::abs(y(0)), p) / p + D.eval(y.tail(n - 1));
  };
  out.grad = [al, D, p, n](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    Eigen::VectorXd g(n);
    g(0) = al * std::copysign(std::pow(std::abs(y(0)), p - 1.0), y(0));
    g.tail(n - 1) = D.grad(y.tail(n - 1));
    return g;
  };
  return out;
}

HomogeneousConvexFn Cf(const AffineData& ad, int n, double a) { return legendre_transform(Cf_star(ad, n, a)); }

ConvexBody Lf_body(const EvaluatedFunction& ev, const AffineData& ad) {
  const int n = ev.n();
  if (n == 2) {
    Eigen::MatrixXd B(1, 1);
    B(0, 0) = ad.dir_norm(0);
    return ConvexBody(Ellipsoid{B});
  }
  if (n == 3) return ConvexBody(Tabulated2D{ad.dir_norm.cwiseInverse()});
  const double p = ad.p;
  const EvaluatedFunction copy = ev;
  return ConvexBody(GaugeBody{n - 1, [copy, p](const Eigen::VectorXd& xi) {
                                const Eigen::VectorXd s = (copy.gx.transpose() * xi).array().abs().pow(p).matrix();
                                return std::pow(integrate_samples(copy.nodes, s).value, 1.0 / p);
                              }});
}

ConvexBody Kf_body(const AffineData& ad, int n, double a) { return body_from_C(Cf(ad, n, a)); }
ConvexBody Kf0_body(const AffineData& ad, int n) {
  const HomogeneousConvexFn D = Df(ad, n);
  if (n != 3) return body_from_C(D);
  // smooth planar body: tabulate its radial function
  constexpr int N = 512;
  Eigen::VectorXd r(N);
  parallel_for(N, [&](std::int64_t k) {
    const double th = 2.0 * std::numbers::pi * k / N;
    r(k) = std::pow(D.eval(Eigen::Vector2d(std::cos(th), std::sin(th))), -1.0 / D.degree);
  });
  return ConvexBody(Tabulated2D{r});
}

IntegralEstimate energy_integral(const EvaluatedFunction& ev, const HomogeneousConvexFn& Cstar) {
  const int n = ev.n();
  if (Cstar.dim != n) throw DomainError("energy_integral: C* must live on R^n");
  check_integrable(ev, Cstar.degree * ev.fn.profile->grad_decay, "energy_integral");
  Eigen::VectorXd s(ev.nodes.size());
  parallel_for(s.size(), [&](std::int64_t i) {
    Eigen::VectorXd g(n);
    g(0) = ev.ft(i);
    g.tail(n - 1) = ev.gx.col(i);
    s(i) = Cstar.eval(g);
  });
  return integrate_samples(ev.nodes, s);
}

IntegralEstimate Df_star_energy(const EvaluatedFunction& ev, const AffineData& ad) {
  const HomogeneousConvexFn D = Df_star_fn(ad, ev.n());
  Eigen::VectorXd s(ev.nodes.size());
  parallel_for(s.size(), [&](std::int64_t i) { s(i) = D.eval(ev.gx.col(i)); });
  return integrate_samples(ev.nodes, s);
}

double weighted_half_volume(const HomogeneousConvexFn& C, double a, int phi_level, int sphere_resolution) {
  const int n = C.dim;
  const HalfSphereRule hs = halfsphere_rule(n, phi_level, sphere_resolution);
  std::vector<double> vals(hs.nodes.cols());
  parallel_for(hs.nodes.cols(), [&](std::int64_t k) {
    vals[k] = std::pow(C.eval(hs.nodes.col(k)), -(n + a) / C.degree) * std::pow(hs.cos_phi(k), a);
  });
  KahanSum s;
  for (Eigen::Index k = 0; k < hs.nodes.cols(); ++k) s.add(hs.weights(k) * vals[k]);
  return s.value() / (n + a);
}

}  // namespace affsob
