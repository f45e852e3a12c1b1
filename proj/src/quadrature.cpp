#include "affsob/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "affsob/errors.hpp"
#include "affsob/random.hpp"
#include "affsob/scalar_kernel.hpp"

namespace affsob {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTanhSinhRange = 3.2;  // |s| limit, endpoint distance ~1e-16 of the interval
constexpr double kExpSinhHigh = 4.5;    // x_max ~ exp(70)

std::string describe(const Eigen::VectorXd& y) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y(i);
  os << ")";
  return os.str();
}

}  // namespace

void gauss_legendre_nodes(int m, std::vector<double>& x, std::vector<double>& w) {
  if (m < 1) throw DomainError("gauss_legendre: m must be >= 1");
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (m == 1) {
      z = 0.0;
      dp = 1.0;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    w[i] = w[m - 1 - i] = (m == 1) ? 2.0 : wi;
  }
}

Rule1D gauss_legendre(int m, double lo, double hi) {
  std::vector<double> xf, wf, xc, wc;
  gauss_legendre_nodes(m, xf, wf);
  gauss_legendre_nodes(std::max(1, (m + 1) / 2), xc, wc);
  const double c = 0.5 * (lo + hi), d = 0.5 * (hi - lo);
  Rule1D r;
  for (std::size_t i = 0; i < xf.size(); ++i) {
    r.x.push_back(c + d * xf[i]);
    r.w.push_back(d * wf[i]);
    r.w_coarse.push_back(0.0);
  }
  for (std::size_t i = 0; i < xc.size(); ++i) {
    r.x.push_back(c + d * xc[i]);
    r.w.push_back(0.0);
    r.w_coarse.push_back(d * wc[i]);
  }
  return r;
}

namespace {
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkPiece {
  double lo, hi, value, error;
};

GkPiece gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double fc = f(c);
  double k = fc * kWgk[7], g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double v = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    k += kWgk[j] * v;
    if (j % 2 == 1) g += kWg[j / 2] * v;
  }
  return {lo, hi, k * h, std::abs((k - g) * h)};
}
}  // namespace

double adaptive_gk(const std::function<double(double)>& f, double lo, double hi, double rel_tol, int max_intervals) {
  std::vector<GkPiece> pieces{gk15(f, lo, hi)};
  auto cmp = [](const GkPiece& a, const GkPiece& b) { return a.error < b.error; };
  while (true) {
    KahanSum total, err;
    for (const auto& pc : pieces) {
      total.add(pc.value);
      err.add(pc.error);
    }
    if (!std::isfinite(total.value())) throw NonFiniteValue("adaptive_gk: non-finite integrand");
    if (err.value() <= rel_tol * std::abs(total.value()) || err.value() < 1e-300) return total.value();
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      if (err.value() <= 1e3 * rel_tol * std::abs(total.value())) return total.value();
      throw NonConvergence("adaptive_gk: interval budget exhausted");
    }
    std::pop_heap(pieces.begin(), pieces.end(), cmp);
    const GkPiece worst = pieces.back();
    pieces.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) return total.value();
    pieces.push_back(gk15(f, worst.lo, mid));
    std::push_heap(pieces.begin(), pieces.end(), cmp);
    pieces.push_back(gk15(f, mid, worst.hi));
    std::push_heap(pieces.begin(), pieces.end(), cmp);
  }
}

Rule1D tanh_sinh(double lo, double hi, int level) {
  if (!(hi > lo)) throw DomainError("tanh_sinh: empty interval");
  const double h = std::ldexp(1.0, -level);
  const int K = static_cast<int>(std::ceil(kTanhSinhRange / h));
  const double d = 0.5 * (hi - lo);
  Rule1D r;
  for (int k = -K; k <= K; ++k) {
    const double s = k * h;
    const double z = kHalfPi * std::sinh(s);
    const double delta = 2.0 / (std::exp(2.0 * std::abs(z)) + 1.0);  // 1 - tanh|z|
    const double x = (k >= 0) ? hi - d * delta : lo + d * delta;
    if (!(x > lo && x < hi)) continue;
    const double ch = std::cosh(z);
    const double w = h * d * kHalfPi * std::cosh(s) / (ch * ch);
    if (!(w > 0.0)) continue;
    r.x.push_back(x);
    r.w.push_back(w);
    r.w_coarse.push_back((k % 2 == 0) ? 2.0 * w : 0.0);
  }
  return r;
}

Rule1D exp_sinh(double lo, int level, double s_low) {
  const double h = std::ldexp(1.0, -level);
  const int K0 = static_cast<int>(std::ceil(s_low / h));
  const int K1 = static_cast<int>(std::ceil(kExpSinhHigh / h));
  Rule1D r;
  for (int k = -K0; k <= K1; ++k) {
    const double s = k * h;
    const double e = std::exp(kHalfPi * std::sinh(s));
    const double w = h * kHalfPi * std::cosh(s) * e;
    r.x.push_back(lo + e);
    r.w.push_back(w);
    r.w_coarse.push_back((k % 2 == 0) ? 2.0 * w : 0.0);
  }
  return r;
}

double sphere_measure(int d) {
  if (d < 0) throw DomainError("sphere_measure: d must be >= 0");
  return 2.0 * std::exp(0.5 * (d + 1) * std::log(kPi) - log_gamma(0.5 * (d + 1)));
}

SphereRule sphere_rule(int d, int resolution, std::uint64_t seed) {
  if (resolution < 1) throw DomainError("sphere_rule: resolution must be >= 1");
  if (d < 0) throw DomainError("sphere_rule: d must be >= 0");
  SphereRule rule;
  rule.sphere_dim = d;
  rule.resolution = resolution;
  if (d == 0) {
    rule.nodes = Eigen::MatrixXd(1, 2);
    rule.nodes << 1.0, -1.0;
    rule.weights = Eigen::VectorXd::Ones(2);
    rule.weights_coarse = rule.weights;
    rule.exact_degree = std::numeric_limits<int>::max();
  } else if (d == 1) {
    const int N = 2 * resolution;
    rule.nodes.resize(2, N);
    rule.weights = Eigen::VectorXd::Constant(N, 2.0 * kPi / N);
    rule.weights_coarse = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < N; ++k) {
      const double th = 2.0 * kPi * k / N;
      rule.nodes(0, k) = std::cos(th);
      rule.nodes(1, k) = std::sin(th);
      if (k % 2 == 0) rule.weights_coarse(k) = 4.0 * kPi / N;
    }
    rule.exact_degree = N - 1;
  } else if (d == 2) {
    std::vector<double> z, wz;
    gauss_legendre_nodes(resolution, z, wz);
    const int m = 2 * resolution;
    const int N = resolution * m;
    rule.nodes.resize(3, N);
    rule.weights.resize(N);
    rule.weights_coarse.resize(N);
    int col = 0;
    for (int i = 0; i < resolution; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
      for (int k = 0; k < m; ++k) {
        const double ph = 2.0 * kPi * (k + 0.5) / m;
        rule.nodes.col(col) << s * std::cos(ph), s * std::sin(ph), z[i];
        rule.weights(col) = wz[i] * 2.0 * kPi / m;
        // embedded estimate: every other longitude (keeps antipodal closure when m/2 is even)
        rule.weights_coarse(col) = (m % 4 == 0) ? ((k % 2 == 0) ? 2.0 * rule.weights(col) : 0.0) : rule.weights(col);
        ++col;
      }
    }
    rule.exact_degree = 2 * resolution - 1;
  } else {
    const int half = resolution;
    const int N = 2 * half;
    rule.nodes.resize(d + 1, N);
    for (int k = 0; k < half; ++k) {
      Eigen::VectorXd g(d + 1);
      for (int i = 0; i <= d; ++i) g(i) = counter_normal(seed, static_cast<std::uint64_t>(k) * (d + 1) + i);
      g.normalize();
      rule.nodes.col(2 * k) = g;
      rule.nodes.col(2 * k + 1) = -g;
    }
    rule.weights = Eigen::VectorXd::Constant(N, sphere_measure(d) / N);
    rule.weights_coarse = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < half / 2; ++k) rule.weights_coarse(2 * k) = rule.weights_coarse(2 * k + 1) = 2.0 * sphere_measure(d) / N;
    rule.exact_degree = -1;
  }
  const Eigen::Index N = rule.nodes.cols();
  rule.antipode.assign(N, -1);
  for (Eigen::Index i = 0; i < N; ++i) {
    if (rule.antipode[i] >= 0) continue;
    for (Eigen::Index j = i + 1; j < N; ++j)
      if (rule.antipode[j] < 0 && (rule.nodes.col(i) + rule.nodes.col(j)).norm() < 1e-12) {
        rule.antipode[i] = j;
        rule.antipode[j] = i;
        rule.nodes.col(j) = -rule.nodes.col(i);  // exact negation
        break;
      }
    if (rule.antipode[i] < 0) throw NonConvergence("sphere_rule: node set not antipodally closed");
  }
  return rule;
}

double integrate_sphere(const SphereRule& rule, const std::function<double(const Eigen::VectorXd&)>& g) {
  KahanSum acc;
  auto eval = [&](Eigen::Index i) {
    const Eigen::VectorXd xi = rule.nodes.col(i);
    const double v = g(xi);
    if (!std::isfinite(v))
      throw NonFiniteValue("integrate_sphere: non-finite value at node " + std::to_string(i) + " " + describe(xi));
    return v;
  };
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const Eigen::Index j = rule.antipode[i];
    if (j < i || rule.weights(i) == 0.0) continue;
    acc.add(rule.weights(i) * (eval(i) + eval(j)));
  }
  return acc.value();
}

HalfSphereRule halfsphere_rule(int n, int phi_level, int sphere_resolution) {
  if (n < 2) throw DomainError("halfsphere_rule: n must be >= 2");
  const Rule1D ph = tanh_sinh(0.0, kHalfPi, phi_level);
  const SphereRule om = sphere_rule(n - 2, sphere_resolution);
  const Eigen::Index N = static_cast<Eigen::Index>(ph.size()) * om.size();
  HalfSphereRule r;
  r.nodes.resize(n, N);
  r.weights.resize(N);
  r.weights_coarse.resize(N);
  r.cos_phi.resize(N);
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < ph.size(); ++j) {
    const double c = std::cos(ph.x[j]), s = std::sin(ph.x[j]);
    const double jac = std::pow(s, n - 2);
    for (Eigen::Index k = 0; k < om.size(); ++k) {
      r.nodes(0, col) = c;
      r.nodes.col(col).tail(n - 1) = s * om.nodes.col(k);
      r.weights(col) = ph.w[j] * om.weights(k) * jac;
      r.weights_coarse(col) = ph.w_coarse[j] * om.weights_coarse(k) * jac;
      r.cos_phi(col) = c;
      ++col;
    }
  }
  return r;
}

namespace {

struct FrameMaps {
  double lambda;
  Eigen::MatrixXd Binv;
  Eigen::VectorXd x0;
  double scale;  // lambda^{-1-a} / |det B|
};

FrameMaps frame_maps(const Frame& f, int n, double a) {
  FrameMaps m;
  if (!(f.lambda > 0.0)) throw DomainError("frame: lambda must be positive");
  m.lambda = f.lambda;
  double detB = 1.0;
  if (f.B.size() == 0) {
    m.Binv = Eigen::MatrixXd::Identity(n - 1, n - 1);
  } else {
    if (f.B.rows() != n - 1 || f.B.cols() != n - 1) throw DomainError("frame: B has wrong shape");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(f.B);
    detB = lu.determinant();
    if (!(std::abs(detB) > 0.0)) throw DomainError("frame: singular B");
    m.Binv = lu.inverse();
  }
  m.x0 = f.x0.size() == 0 ? Eigen::VectorXd::Zero(n - 1) : f.x0;
  if (m.x0.size() != n - 1) throw DomainError("frame: x0 has wrong size");
  m.scale = std::pow(f.lambda, -1.0 - a) / std::abs(detB);
  return m;
}

struct NodeBuffer {
  std::vector<double> pts, w, wc;
  void push(const Eigen::VectorXd& y, double wi, double wci) {
    pts.insert(pts.end(), y.data(), y.data() + y.size());
    w.push_back(wi);
    wc.push_back(wci);
  }
};

HalfSpaceNodes finalize(NodeBuffer& buf, int n, double a) {
  HalfSpaceNodes out;
  out.n = n;
  out.a = a;
  const Eigen::Index N = static_cast<Eigen::Index>(buf.w.size());
  out.points = Eigen::Map<Eigen::MatrixXd>(buf.pts.data(), n, N);
  out.weights = Eigen::Map<Eigen::VectorXd>(buf.w.data(), N);
  out.weights_coarse = Eigen::Map<Eigen::VectorXd>(buf.wc.data(), N);
  return out;
}

Eigen::VectorXd to_original(const FrameMaps& fm, double u, const Eigen::VectorXd& v) {
  Eigen::VectorXd y(v.size() + 1);
  y(0) = u / fm.lambda;
  y.tail(v.size()) = fm.x0 + fm.Binv * v;
  return y;
}

HalfSpaceNodes polar_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geo) {
  const int n = rule.n;
  const double a = rule.a;
  const FrameMaps fm = frame_maps(geo.frame, n, a);
  const SphereRule om = sphere_rule(n - 2, rule.sphere_resolution);

  std::vector<double> phis = {0.0};
  for (double b : geo.phi_breaks)
    if (b > 1e-12 && b < kHalfPi - 1e-12) phis.push_back(b);
  phis.push_back(kHalfPi);
  std::sort(phis.begin(), phis.end());
  phis.erase(std::unique(phis.begin(), phis.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }), phis.end());

  NodeBuffer buf;
  for (std::size_t seg = 0; seg + 1 < phis.size(); ++seg) {
    const Rule1D ph = tanh_sinh(phis[seg], phis[seg + 1], rule.level);
    for (std::size_t j = 0; j < ph.size(); ++j) {
      const double phi = ph.x[j];
      const double c = std::cos(phi), s = std::sin(phi);
      for (Eigen::Index k = 0; k < om.size(); ++k) {
        const Eigen::VectorXd omega = om.nodes.col(k);
        std::vector<double> cuts;
        if (geo.ray_breaks)
          for (double b : geo.ray_breaks(phi, omega))
            if (b > 0.0 && b < geo.support_radius && std::isfinite(b)) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::abs(x - y) < 1e-13 * (1.0 + y); }), cuts.end());
        std::vector<double> ends = {0.0};
        ends.insert(ends.end(), cuts.begin(), cuts.end());
        const bool finite = std::isfinite(geo.support_radius);
        if (finite) ends.push_back(geo.support_radius);
        const double ang_w = ph.w[j] * om.weights(k);
        const double ang_wc = ph.w_coarse[j] * om.weights_coarse(k);
        if (ang_w == 0.0 && ang_wc == 0.0) continue;
        const double sin_jac = std::pow(s, n - 2);
        auto emit = [&](const Rule1D& rr) {
          for (std::size_t i = 0; i < rr.size(); ++i) {
            const double r = rr.x[i];
            const double u = r * c;
            const double jac = std::pow(r, n - 1) * sin_jac * std::pow(u, a) * fm.scale;
            const double wi = ang_w * rr.w[i] * jac;
            const double wci = ang_wc * rr.w_coarse[i] * jac;
            if (wi == 0.0 && wci == 0.0) continue;
            if (!std::isfinite(wi) || !std::isfinite(wci)) continue;  // r overflow at the far end of the exp-sinh range
            buf.push(to_original(fm, u, r * s * omega), wi, wci);
          }
        };
        for (std::size_t e = 0; e + 1 < ends.size(); ++e) emit(tanh_sinh(ends[e], ends[e + 1], rule.level));
        if (!finite) {
          // the Jacobian r^{n-1} (n >= 2) suppresses the region below exp(-15)
          emit(exp_sinh(ends.back(), rule.level, ends.size() > 1 ? 4.5 : 3.0));
        }
      }
    }
  }
  HalfSpaceNodes out = finalize(buf, n, a);
  out.double_exponential = true;
  return out;
}

void composite_gl(int panels, double lo, double hi, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> gx, gw;
  gauss_legendre_nodes(8, gx, gw);
  const double hstep = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * hstep, d = 0.5 * hstep;
    for (int i = 0; i < 8; ++i) {
      x.push_back(c + d * gx[i]);
      w.push_back(d * gw[i]);
    }
  }
}

double tail_fraction(double R, int n, double a, double decay) {
  if (!std::isfinite(decay)) return 0.0;
  return std::pow(1.0 + R, n + a - decay) * (n + a) / (decay - n - a);
}

HalfSpaceNodes tensor_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geo, double decay) {
  const int n = rule.n;
  const double a = rule.a;
  const FrameMaps fm = frame_maps(geo.frame, n, a);
  const double R = std::min(rule.truncation_radius, geo.support_radius);
  const int panels = std::max(1, 1 << std::max(0, rule.level - 1));
  std::vector<double> tx, tw, xx, xw;
  composite_gl(panels, 0.0, R, tx, tw);
  composite_gl(2 * panels, -R, R, xx, xw);
  // embedded estimate: the same construction with half as many panels
  std::vector<double> tx2, tw2, xx2, xw2;
  composite_gl(std::max(1, panels / 2), 0.0, R, tx2, tw2);
  composite_gl(std::max(1, panels), -R, R, xx2, xw2);
  NodeBuffer buf;
  auto sweep = [&](const std::vector<double>& T, const std::vector<double>& TW, const std::vector<double>& X,
                   const std::vector<double>& XW, bool coarse) {
    const std::size_t m = X.size();
    std::vector<std::size_t> idx(n - 1, 0);
    while (true) {
      double wx = 1.0;
      Eigen::VectorXd v(n - 1);
      for (int d = 0; d < n - 1; ++d) {
        v(d) = X[idx[d]];
        wx *= XW[idx[d]];
      }
      for (std::size_t i = 0; i < T.size(); ++i) {
        const double u = T[i];
        const double wi = TW[i] * wx * std::pow(u, a) * fm.scale;
        buf.push(to_original(fm, u, v), coarse ? 0.0 : wi, coarse ? wi : 0.0);
      }
      int d = 0;
      while (d < n - 1 && ++idx[d] == m) idx[d++] = 0;
      if (d == n - 1) break;
    }
  };
  sweep(tx, tw, xx, xw, false);
  sweep(tx2, tw2, xx2, xw2, true);
  HalfSpaceNodes out = finalize(buf, n, a);
  out.tail_fraction = tail_fraction(R, n, a, decay);
  return out;
}

HalfSpaceNodes cube_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geo, double decay) {
  const int n = rule.n;
  const double a = rule.a;
  const FrameMaps fm = frame_maps(geo.frame, n, a);
  const int m = 8 << std::max(0, rule.level - 2);
  const Rule1D g = gauss_legendre(m, 0.0, 1.0);
  NodeBuffer buf;
  const std::size_t M = g.size();
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    const double s = g.x[idx[0]];
    const double u = s / (1.0 - s);
    double w = g.w[idx[0]] / ((1.0 - s) * (1.0 - s));
    double wc = g.w_coarse[idx[0]] / ((1.0 - s) * (1.0 - s));
    Eigen::VectorXd v(n - 1);
    for (int d = 1; d < n; ++d) {
      const double vv = g.x[idx[d]];
      const double th = kPi * (vv - 0.5);
      v(d - 1) = std::tan(th);
      const double jac = kPi / (std::cos(th) * std::cos(th));
      w *= g.w[idx[d]] * jac;
      wc *= g.w_coarse[idx[d]] * jac;
    }
    const double common = std::pow(u, a) * fm.scale;
    if (w != 0.0 || wc != 0.0) buf.push(to_original(fm, u, v), w * common, wc * common);
    int d = 0;
    while (d < n && ++idx[d] == M) idx[d++] = 0;
    if (d == n) break;
  }
  HalfSpaceNodes out = finalize(buf, n, a);
  (void)decay;
  return out;
}

HalfSpaceNodes mc_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geo, double decay) {
  const int n = rule.n;
  const double a = rule.a;
  const FrameMaps fm = frame_maps(geo.frame, n, a);
  const double m = n + a;
  const double kappa = std::isfinite(decay) ? std::clamp(0.5 * (decay - m), 0.25, 4.0) : 2.0;
  const double R0 = 1.0;
  const double half_sphere = 0.5 * sphere_measure(n - 1);
  const std::int64_t N = std::max<std::int64_t>(2, rule.node_budget);
  NodeBuffer buf;
  for (std::int64_t i = 0; i < N; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n + 2);
    Eigen::VectorXd dir(n);
    for (int k = 0; k < n; ++k) dir(k) = counter_normal(rule.seed, base + k);
    dir.normalize();
    dir(0) = std::abs(dir(0));
    const double U = counter_uniform(rule.seed ^ 0x9E3779B97F4A7C15ULL, static_cast<std::uint64_t>(i));
    double r = R0 * (std::pow(U, -1.0 / kappa) - 1.0);
    if (r > geo.support_radius) r = geo.support_radius * 2.0;  // zero contribution, kept for unbiasedness
    const double dens_r = kappa / R0 * std::pow(1.0 + r / R0, -(kappa + 1.0));
    const double u = r * dir(0);
    const double w = half_sphere * std::pow(r, n - 1) / dens_r * std::pow(u, a) * fm.scale / static_cast<double>(N);
    const double wc = (i < N / 2) ? 2.0 * w : 0.0;
    buf.push(to_original(fm, u, r * dir.tail(n - 1)), w, wc);
  }
  HalfSpaceNodes out = finalize(buf, n, a);
  out.stochastic = true;
  return out;
}

}  // namespace

HalfSpaceNodes halfspace_nodes(const HalfSpaceRule& rule, const HalfSpaceGeometry& geometry, double decay_hint) {
  if (rule.n < 2) throw DomainError("halfspace_nodes: n must be >= 2");
  if (!(rule.a >= 0.0)) throw DomainError("halfspace_nodes: a must be >= 0");
  if (!std::isfinite(geometry.support_radius) && !(decay_hint > rule.n + rule.a))
    throw NonIntegrable("integrand decay exponent " + std::to_string(decay_hint) + " does not exceed n + a = " +
                        std::to_string(rule.n + rule.a));
  switch (rule.scheme) {
    case HalfSpaceScheme::polar:
      return polar_nodes(rule, geometry);
    case HalfSpaceScheme::tensor_gauss:
      return tensor_nodes(rule, geometry, decay_hint);
    case HalfSpaceScheme::map_to_cube:
      return cube_nodes(rule, geometry, decay_hint);
    case HalfSpaceScheme::monte_carlo:
      return mc_nodes(rule, geometry, decay_hint);
  }
  throw DomainError("halfspace_nodes: unknown scheme");
}

IntegralEstimate integrate_samples(const HalfSpaceNodes& nodes, const Eigen::VectorXd& samples) {
  if (samples.size() != nodes.size()) throw DomainError("integrate_samples: size mismatch");
  KahanSum fine, coarse, abs_sum;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const double g = samples(i);
    if (nodes.weights(i) == 0.0 && nodes.weights_coarse(i) == 0.0) continue;
    if (!std::isfinite(g))
      throw NonFiniteValue("integrate_halfspace: non-finite integrand at " + describe(nodes.points.col(i)));
    fine.add(nodes.weights(i) * g);
    coarse.add(nodes.weights_coarse(i) * g);
    abs_sum.add(std::abs(nodes.weights(i) * g));
  }
  IntegralEstimate e;
  e.value = fine.value();
  if (nodes.stochastic) {
    const double N = static_cast<double>(nodes.size());
    KahanSum var;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      const double d = N * nodes.weights(i) * samples(i) - e.value;
      var.add(d * d);
    }
    e.err_estimate = 3.0 * std::sqrt(var.value() / (N * (N - 1.0)));
  } else {
    const double diff = std::abs(e.value - coarse.value());
    const double scale = std::max(std::abs(e.value), 1e-300);
    // Double-exponential rules roughly square their error when h halves; use
    // that model only once the coarse rule is already in its asymptotic regime.
    if (nodes.double_exponential && diff < 1e-2 * scale)
      e.err_estimate = 10.0 * diff * diff / scale;
    else
      e.err_estimate = diff;
    e.err_estimate += 1e-15 * abs_sum.value();
  }
  e.err_estimate += nodes.tail_fraction * std::abs(e.value);
  return e;
}

IntegralEstimate integrate_halfspace(const HalfSpaceRule& rule, const std::function<double(const Eigen::VectorXd&)>& g,
                                     double decay_hint, const HalfSpaceGeometry& geometry) {
  const HalfSpaceNodes nodes = halfspace_nodes(rule, geometry, decay_hint);
  Eigen::VectorXd samples(nodes.size());
  parallel_for(nodes.size(), [&](std::int64_t i) {
    samples(i) = (nodes.weights(i) == 0.0 && nodes.weights_coarse(i) == 0.0) ? 0.0 : g(nodes.points.col(i));
  });
  return integrate_samples(nodes, samples);
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("AFFSOB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body) {
  const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(), count));
  if (workers <= 1 || count < 1024) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  constexpr std::int64_t chunk = 256;
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::int64_t lo = next.fetch_add(chunk);
          if (lo >= count || failed) break;
          const std::int64_t hi = std::min(count, lo + chunk);
          for (std::int64_t i = lo; i < hi; ++i) body(i);
        }
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace affsob
