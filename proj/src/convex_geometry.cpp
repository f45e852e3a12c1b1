#include "affsob/convex_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "affsob/errors.hpp"
#include "affsob/quadrature.hpp"
#include "affsob/random.hpp"
#include "affsob/scalar_kernel.hpp"

namespace affsob {
namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Direction grids and local maximization

Eigen::MatrixXd direction_grid(int d) {
  if (d == 1) {
    Eigen::MatrixXd g(1, 2);
    g << 1.0, -1.0;
    return g;
  }
  if (d == 2) {
    const int N = 1024;
    Eigen::MatrixXd g(2, N);
    for (int k = 0; k < N; ++k) g.col(k) << std::cos(2 * kPi * k / N), std::sin(2 * kPi * k / N);
    return g;
  }
  if (d == 3) {
    const int N = 6000;
    Eigen::MatrixXd g(3, N);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < N; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / N;
      const double r = std::sqrt(1.0 - z * z);
      g.col(k) << r * std::cos(golden * k), r * std::sin(golden * k), z;
    }
    return g;
  }
  const int N = 30000;
  Eigen::MatrixXd g(d, N);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i) g(i, k) = counter_normal(0xD1CEULL, static_cast<std::uint64_t>(k) * d + i);
    g.col(k).normalize();
  }
  return g;
}

double grid_spacing(int d, Eigen::Index N) {
  if (d == 1) return 0.0;
  if (d == 2) return 2.0 * kPi / static_cast<double>(N);
  return std::pow(sphere_measure(d - 1) / static_cast<double>(N), 1.0 / (d - 1)) * 1.5;
}

// Brent maximization of a 1-D function on [a, b].
double brent_max(const std::function<double(double)>& f, double a, double b, double tol, double* fmax) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = -f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-14, tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv), q = (x - v) * (fx - fw), p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m >= x) ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= m) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = -f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw; w = x; fw = fx; x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw; w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (fmax) *fmax = -fx;
  return x;
}

// Nelder-Mead maximization in R^k.
Eigen::VectorXd nelder_mead_max(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                                double step, double ftol, int max_iter, double* fbest) {
  const Eigen::Index k = x0.size();
  std::vector<Eigen::VectorXd> pts(k + 1, x0);
  std::vector<double> val(k + 1);
  for (Eigen::Index i = 0; i < k; ++i) pts[i + 1](i) += step;
  for (Eigen::Index i = 0; i <= k; ++i) val[i] = -f(pts[i]);
  std::vector<Eigen::Index> order(k + 1);
  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i <= k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return val[a] < val[b]; });
    const Eigen::Index best = order[0], worst = order[k], second = order[k - 1];
    if (std::abs(val[worst] - val[best]) <= ftol * (std::abs(val[best]) + 1e-300)) {
      double spread = 0.0;
      for (Eigen::Index i = 0; i <= k; ++i) spread = std::max(spread, (pts[i] - pts[best]).norm());
      if (spread < 1e-9) break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i <= k; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(k);
    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = -f(xr);
    if (fr < val[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = -f(xe);
      if (fe < fr) { pts[worst] = xe; val[worst] = fe; } else { pts[worst] = xr; val[worst] = fr; }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (pts[worst] - centroid);
      const double fc = -f(xc);
      if (fc < val[worst]) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (Eigen::Index i = 0; i <= k; ++i)
          if (i != best) {
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            val[i] = -f(pts[i]);
          }
      }
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i <= k; ++i)
    if (val[i] < val[best]) best = i;
  if (fbest) *fbest = -val[best];
  return pts[best];
}

// Orthonormal basis of the tangent space at unit vector u.
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& u) {
  const Eigen::Index d = u.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
  M.col(0) = u;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(d - 1);
}

// Local refinement of a maximum of F on the sphere starting from theta0.
SphereMax refine_on_sphere(const ScalarField& F, const Eigen::VectorXd& theta0, double f0, double spacing) {
  const int d = static_cast<int>(theta0.size());
  SphereMax out{theta0, f0};
  if (d == 1) return out;
  if (d == 2) {
    const double phi0 = std::atan2(theta0(1), theta0(0));
    auto g = [&](double phi) {
      Eigen::VectorXd t(2);
      t << std::cos(phi), std::sin(phi);
      return F(t);
    };
    double fm = 0.0;
    const double phi = brent_max(g, phi0 - spacing, phi0 + spacing, 1e-12, &fm);
    if (fm >= f0) {
      out.argmax = Eigen::Vector2d(std::cos(phi), std::sin(phi));
      out.value = fm;
    }
    return out;
  }
  const Eigen::MatrixXd T = tangent_basis(theta0);
  auto g = [&](const Eigen::VectorXd& s) { return F((theta0 + T * s).normalized()); };
  double fm = 0.0;
  const Eigen::VectorXd s = nelder_mead_max(g, Eigen::VectorXd::Zero(d - 1), 0.5 * spacing, 1e-15, 400, &fm);
  if (fm >= f0) {
    out.argmax = (theta0 + T * s).normalized();
    out.value = fm;
  }
  return out;
}

// A scalar function cached on a direction grid (lazily, thread-safe).
struct CachedSphereFn {
  int dim = 0;
  ScalarField fn;
  mutable std::once_flag once;
  mutable Eigen::MatrixXd grid;
  mutable Eigen::VectorXd values;
  mutable double spacing = 0.0;

  void ensure() const {
    std::call_once(once, [this] {
      grid = direction_grid(dim);
      values.resize(grid.cols());
      parallel_for(grid.cols(), [&](std::int64_t k) { values(k) = fn(grid.col(k)); });
      spacing = grid_spacing(dim, grid.cols());
    });
  }

  // Maximize G(<y,theta>, fn(theta)) over theta with <y,theta> > 0.
  SphereMax maximize(const Eigen::VectorXd& y, const std::function<double(double, double)>& G) const {
    ensure();
    const Eigen::VectorXd proj = grid.transpose() * y;
    Eigen::Index best = -1;
    double bestv = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < grid.cols(); ++k) {
      if (!(proj(k) > 0.0)) continue;
      const double v = G(proj(k), values(k));
      if (v > bestv) {
        bestv = v;
        best = k;
      }
    }
    if (best < 0) throw NonConvergence("sphere maximization: no admissible direction");
    auto F = [&](const Eigen::VectorXd& th) {
      const double s = th.dot(y);
      if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
      return G(s, fn(th));
    };
    SphereMax m = refine_on_sphere(F, grid.col(best), bestv, spacing);
    if (!std::isfinite(m.value)) throw NonConvergence("sphere maximization: non-finite maximum");
    return m;
  }
};

// ---------------------------------------------------------------------------
// Moment helpers

Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

double G_antideriv(double s, double p) { return s * std::pow(std::abs(s), p) / (p + 1.0); }

// int_0^1 |(1-tau) a + tau b|^p dtau
double J_segment(double a, double b, double p) {
  if (std::abs(b - a) < 1e-2 * std::max(std::abs(a), std::abs(b)) || a == b) {
    static thread_local std::vector<double> x, w;
    if (x.empty()) gauss_legendre_nodes(8, x, w);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double tau = 0.5 * (x[i] + 1.0);
      s += 0.5 * w[i] * std::pow(std::abs((1.0 - tau) * a + tau * b), p);
    }
    return s;
  }
  return (G_antideriv(b, p) - G_antideriv(a, p)) / (b - a);
}

// int_{B^d} |w_1|^p dw
double ball_moment(int d, double p) {
  if (d == 1) return 2.0 / (p + 1.0);
  return std::exp(log_ball_volume(double(d - 1)) + log_gamma((p + 1.0) / 2.0) + log_gamma((d + 1.0) / 2.0) -
                  log_gamma((p + d + 2.0) / 2.0));
}

}  // namespace

// ---------------------------------------------------------------------------

namespace detail {
struct BodyImpl {
  ConvexBody::Rep rep;
  int dim = 0;
  // ellipsoid
  Eigen::MatrixXd B, Binv_T;
  double detB = 1.0;
  // polygon: edge normals and offsets, <n_e, z> <= c_e
  Eigen::Matrix2Xd normals;
  Eigen::VectorXd offsets;
  // tabulated: Fourier coefficients and the interpolant on a grid 8x finer
  Eigen::VectorXd fa, fb, fine;
  // gauge-only or support-only bodies
  std::unique_ptr<CachedSphereFn> cached_gauge, cached_support;
  mutable std::once_flag vol_once;
  mutable double vol = 0.0;
};
}  // namespace detail

namespace {

double fourier_radial(const detail::BodyImpl& b, Eigen::Index N, double theta) {
  double r = 0.5 * b.fa(0);
  for (Eigen::Index k = 1; k < b.fa.size(); ++k) {
    const double c = (2 * k == N) ? 0.5 : 1.0;
    r += c * (b.fa(k) * std::cos(k * theta) + b.fb(k) * std::sin(k * theta));
  }
  return r;
}

// cubic Lagrange on the fine grid; the trigonometric sum costs O(N) per call
double tabulated_radial(const detail::BodyImpl& b, double theta) {
  const Eigen::Index M = b.fine.size();
  double x = theta / (2.0 * kPi) * M;
  x -= M * std::floor(x / M);
  const Eigen::Index i = static_cast<Eigen::Index>(x);
  const double t = x - i;
  auto at = [&](Eigen::Index j) { return b.fine(((j % M) + M) % M); };
  const double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
  return -t * (t - 1.0) * (t - 2.0) / 6.0 * y0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * y1 -
         (t + 1.0) * t * (t - 2.0) / 2.0 * y2 + (t + 1.0) * t * (t - 1.0) / 6.0 * y3;
}

double raw_gauge(const detail::BodyImpl& b, const Eigen::VectorXd& y);

}  // namespace

ConvexBody::ConvexBody(Rep rep) {
  auto impl = std::make_shared<detail::BodyImpl>();
  impl->rep = std::move(rep);
  detail::BodyImpl& b = *impl;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          if (r.B.rows() != r.B.cols() || r.B.rows() < 1) throw DomainError("ellipsoid: B must be square");
          b.dim = static_cast<int>(r.B.rows());
          Eigen::PartialPivLU<Eigen::MatrixXd> lu(r.B);
          b.detB = lu.determinant();
          if (!(std::abs(b.detB) > 0.0)) throw DomainError("ellipsoid: singular matrix");
          b.B = r.B;
          b.Binv_T = lu.inverse().transpose();
        } else if constexpr (std::is_same_v<T, Polygon>) {
          const Eigen::Index m = r.vertices.cols();
          if (m < 3) throw DomainError("polygon: need at least 3 vertices");
          b.dim = 2;
          b.normals.resize(2, m);
          b.offsets.resize(m);
          for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Vector2d v0 = r.vertices.col(i), v1 = r.vertices.col((i + 1) % m);
            const Eigen::Vector2d e = v1 - v0;
            const Eigen::Vector2d nrm(e(1), -e(0));
            const double c = nrm.dot(v0);
            if (!(c > 0.0)) throw DomainError("polygon: vertices must be counter-clockwise around the origin");
            b.normals.col(i) = nrm;
            b.offsets(i) = c;
          }
        } else if constexpr (std::is_same_v<T, LqBall>) {
          if (r.dim < 1 || !(r.q >= 1.0) || !(r.scale > 0.0)) throw DomainError("lq_ball: bad parameters");
          b.dim = r.dim;
        } else if constexpr (std::is_same_v<T, GaugeBody>) {
          if (r.dim < 1 || !r.gauge) throw DomainError("gauge body: bad parameters");
          b.dim = r.dim;
        } else if constexpr (std::is_same_v<T, SupportBody>) {
          if (r.dim < 1 || !r.support) throw DomainError("support body: bad parameters");
          b.dim = r.dim;
        } else if constexpr (std::is_same_v<T, Tabulated2D>) {
          const Eigen::Index N = r.radial.size();
          if (N < 4 || N % 2 != 0) throw DomainError("tabulated body: need an even number >= 4 of samples");
          if ((r.radial.array() <= 0.0).any()) throw DomainError("tabulated body: radial samples must be positive");
          b.dim = 2;
          const Eigen::Index K = N / 2;
          b.fa = Eigen::VectorXd::Zero(K + 1);
          b.fb = Eigen::VectorXd::Zero(K + 1);
          for (Eigen::Index k = 0; k <= K; ++k)
            for (Eigen::Index j = 0; j < N; ++j) {
              const double th = 2.0 * kPi * j / N;
              b.fa(k) += 2.0 / N * r.radial(j) * std::cos(k * th);
              b.fb(k) += 2.0 / N * r.radial(j) * std::sin(k * th);
            }
          b.fine.resize(8 * N);
          for (Eigen::Index j = 0; j < 8 * N; ++j) b.fine(j) = fourier_radial(b, N, 2.0 * kPi * j / (8 * N));
        }
      },
      b.rep);
  const bool needs_gauge_cache = std::holds_alternative<GaugeBody>(b.rep) || std::holds_alternative<LqBall>(b.rep) ||
                                 std::holds_alternative<Tabulated2D>(b.rep);
  if (needs_gauge_cache) {
    b.cached_gauge = std::make_unique<CachedSphereFn>();
    b.cached_gauge->dim = b.dim;
    b.cached_gauge->fn = [p = impl.get()](const Eigen::VectorXd& y) { return raw_gauge(*p, y); };
  }
  if (const auto* s = std::get_if<SupportBody>(&b.rep)) {
    b.cached_support = std::make_unique<CachedSphereFn>();
    b.cached_support->dim = b.dim;
    b.cached_support->fn = s->support;
  }
  impl_ = std::move(impl);
}

int ConvexBody::dim() const { return impl_->dim; }
const ConvexBody::Rep& ConvexBody::rep() const { return impl_->rep; }

ConvexBody ConvexBody::ball(int d, double radius) {
  return ConvexBody(Ellipsoid{Eigen::MatrixXd::Identity(d, d) / radius});
}

ConvexBody ConvexBody::cube(int d, double half_side) {
  if (d == 2) {
    Eigen::Matrix2Xd v(2, 4);
    v << 1, -1, -1, 1, 1, 1, -1, -1;
    return ConvexBody(Polygon{half_side * v});
  }
  return ConvexBody(LqBall{d, std::numeric_limits<double>::infinity(), half_side});
}

namespace {

double lq_norm(const Eigen::VectorXd& y, double q) {
  if (std::isinf(q)) return y.cwiseAbs().maxCoeff();
  if (q == 1.0) return y.cwiseAbs().sum();
  return std::pow(y.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

double raw_gauge(const detail::BodyImpl& b, const Eigen::VectorXd& y) {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return (b.B * y).norm();
        } else if constexpr (std::is_same_v<T, Polygon>) {
          double g = 0.0;
          for (Eigen::Index i = 0; i < b.normals.cols(); ++i) g = std::max(g, b.normals.col(i).dot(y) / b.offsets(i));
          return g;
        } else if constexpr (std::is_same_v<T, LqBall>) {
          return lq_norm(y, r.q) / r.scale;
        } else if constexpr (std::is_same_v<T, GaugeBody>) {
          return r.gauge(y);
        } else if constexpr (std::is_same_v<T, Tabulated2D>) {
          const double nr = y.norm();
          if (nr == 0.0) return 0.0;
          return nr / tabulated_radial(b, std::atan2(y(1), y(0)));
        } else {
          // support-only: gauge_K = h_{K polar} = max <y,v> / h_K(v)
          const double nr = y.norm();
          if (nr == 0.0) return 0.0;
          const auto m = b.cached_support->maximize(y, [](double s, double h) { return s / h; });
          return m.value;
        }
      },
      b.rep);
}

double raw_support(const detail::BodyImpl& b, const Eigen::VectorXd& y) {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return (b.Binv_T * y).norm();
        } else if constexpr (std::is_same_v<T, Polygon>) {
          return (r.vertices.transpose() * y).maxCoeff();
        } else if constexpr (std::is_same_v<T, LqBall>) {
          const double qs = std::isinf(r.q) ? 1.0 : (r.q == 1.0 ? std::numeric_limits<double>::infinity() : r.q / (r.q - 1.0));
          return r.scale * lq_norm(y, qs);
        } else if constexpr (std::is_same_v<T, SupportBody>) {
          return r.support(y);
        } else {
          if (y.norm() == 0.0) return 0.0;
          const auto m = b.cached_gauge->maximize(y, [](double s, double g) { return s / g; });
          return m.value;
        }
      },
      b.rep);
}

}  // namespace

double support(const ConvexBody& body, const Eigen::VectorXd& y) {
  if (y.size() != body.dim()) throw DomainError("support: dimension mismatch");
  return raw_support(body.impl(), y);
}

double gauge(const ConvexBody& body, const Eigen::VectorXd& y) {
  if (y.size() != body.dim()) throw DomainError("gauge: dimension mismatch");
  return raw_gauge(body.impl(), y);
}

double radial(const ConvexBody& body, const Eigen::VectorXd& y) { return 1.0 / gauge(body, y); }

ConvexBody polar(const ConvexBody& body) {
  const auto& b = body.impl();
  return std::visit(
      [&](const auto& r) -> ConvexBody {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return ConvexBody(Ellipsoid{b.Binv_T});
        } else if constexpr (std::is_same_v<T, Polygon>) {
          const Eigen::Index m = b.normals.cols();
          Eigen::Matrix2Xd v(2, m);
          for (Eigen::Index i = 0; i < m; ++i) v.col(i) = b.normals.col(i) / b.offsets(i);
          return ConvexBody(Polygon{v});
        } else if constexpr (std::is_same_v<T, LqBall>) {
          const double qs = std::isinf(r.q) ? 1.0 : (r.q == 1.0 ? std::numeric_limits<double>::infinity() : r.q / (r.q - 1.0));
          return ConvexBody(LqBall{r.dim, qs, 1.0 / r.scale});
        } else if constexpr (std::is_same_v<T, SupportBody>) {
          return ConvexBody(GaugeBody{r.dim, r.support});
        } else {
          return ConvexBody(SupportBody{b.dim, [body](const Eigen::VectorXd& y) { return gauge(body, y); }});
        }
      },
      b.rep);
}

namespace {

double polygon_area(const Eigen::Matrix2Xd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const Eigen::Index j = (i + 1) % v.cols();
    s += v(0, i) * v(1, j) - v(0, j) * v(1, i);
  }
  return 0.5 * s;
}

// Area of the polygon circumscribed by the support lines at N uniform directions.
double circumscribed_area(const std::vector<double>& h) {
  const std::size_t N = h.size();
  const double delta = 2.0 * kPi / static_cast<double>(N);
  KahanSum acc;
  for (std::size_t k = 0; k < N; ++k) {
    const double hp = h[(k + 1) % N], hm = h[(k + N - 1) % N];
    acc.add(h[k] * (hp + hm - 2.0 * h[k] * std::cos(delta)));
  }
  return 0.5 * acc.value() / std::sin(delta);
}

double compute_volume(const ConvexBody& body) {
  const auto& b = body.impl();
  const int d = b.dim;
  if (const auto* e = std::get_if<Ellipsoid>(&b.rep)) {
    (void)e;
    return ball_volume(double(d)) / std::abs(b.detB);
  }
  if (const auto* p = std::get_if<Polygon>(&b.rep)) return polygon_area(p->vertices);
  if (const auto* l = std::get_if<LqBall>(&b.rep)) {
    const double lg1 = std::isinf(l->q) ? 0.0 : log_gamma(1.0 + 1.0 / l->q);
    const double lgd = std::isinf(l->q) ? 0.0 : log_gamma(1.0 + d / l->q);
    return std::exp(d * (std::log(2.0) + lg1 + std::log(l->scale)) - lgd);
  }
  if (const auto* t = std::get_if<Tabulated2D>(&b.rep)) {
    // trapezoid on the samples: exact for the band-limited interpolant up to aliasing
    const Eigen::Index N = t->radial.size();
    return 0.5 * (2.0 * kPi / N) * t->radial.squaredNorm();
  }
  if (d == 1) {
    Eigen::VectorXd e(1);
    e << 1.0;
    return std::holds_alternative<SupportBody>(b.rep) ? support(body, e) + support(body, -e) : 2.0 / gauge(body, e);
  }
  if (d == 2 && std::holds_alternative<SupportBody>(b.rep)) {
    const int N = 2048;
    std::vector<double> h(N);
    parallel_for(N, [&](std::int64_t k) {
      Eigen::VectorXd u(2);
      u << std::cos(2 * kPi * k / N), std::sin(2 * kPi * k / N);
      h[k] = support(body, u);
    });
    std::vector<double> h2(N / 2);
    for (int k = 0; k < N / 2; ++k) h2[k] = h[2 * k];
    const double A1 = circumscribed_area(h2), A2 = circumscribed_area(h);
    return (4.0 * A2 - A1) / 3.0;  // O(N^-2) error cancelled
  }
  if (d == 2) {
    // adaptive in angle: bisection localizes corners of the radial function
    auto f = [&](double th) {
      const double r = radial(body, v2(std::cos(th), std::sin(th)));
      return r * r;
    };
    return 0.5 * (adaptive_gk(f, 0.0, 0.5 * kPi, 1e-14) + adaptive_gk(f, 0.5 * kPi, kPi, 1e-14) +
                  adaptive_gk(f, kPi, 1.5 * kPi, 1e-14) + adaptive_gk(f, 1.5 * kPi, 2.0 * kPi, 1e-14));
  }
  const SphereRule rule = sphere_rule(d - 1, d == 3 ? 48 : 20000);
  std::vector<double> vals(rule.size());
  parallel_for(rule.size(), [&](std::int64_t k) { vals[k] = std::pow(radial(body, rule.nodes.col(k)), d); });
  KahanSum acc;
  for (Eigen::Index k = 0; k < rule.size(); ++k) acc.add(rule.weights(k) * vals[k]);
  return acc.value() / d;
}

}  // namespace

double volume(const ConvexBody& body) {
  const auto& b = body.impl();
  std::call_once(b.vol_once, [&] { b.vol = compute_volume(body); });
  return b.vol;
}

ConvexBody linear_image(const ConvexBody& body, const Eigen::MatrixXd& A) {
  const int d = body.dim();
  if (A.rows() != d || A.cols() != d) throw DomainError("linear_image: dimension mismatch");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(std::abs(lu.determinant()) > 0.0)) throw DomainError("linear_image: singular matrix");
  const Eigen::MatrixXd Ainv = lu.inverse();
  const auto& b = body.impl();
  if (std::holds_alternative<Ellipsoid>(b.rep)) return ConvexBody(Ellipsoid{b.B * Ainv});
  if (const auto* p = std::get_if<Polygon>(&b.rep)) {
    Eigen::Matrix2Xd v = A * p->vertices;
    if (lu.determinant() < 0.0) v = v.rowwise().reverse().eval();
    return ConvexBody(Polygon{v});
  }
  if (std::holds_alternative<SupportBody>(b.rep)) {
    const Eigen::MatrixXd At = A.transpose();
    return ConvexBody(SupportBody{d, [body, At](const Eigen::VectorXd& y) { return support(body, At * y); }});
  }
  return ConvexBody(GaugeBody{d, [body, Ainv](const Eigen::VectorXd& y) { return gauge(body, Ainv * y); }});
}

double moment(const ConvexBody& body, const Eigen::VectorXd& y, double p) {
  const auto& b = body.impl();
  const int d = b.dim;
  if (y.size() != d) throw DomainError("moment: dimension mismatch");
  if (!(p >= 1.0)) throw DomainError("moment: p must be >= 1");
  if (std::holds_alternative<Ellipsoid>(b.rep))
    return std::pow((b.Binv_T * y).norm(), p) * ball_moment(d, p) / std::abs(b.detB);
  if (const auto* poly = std::get_if<Polygon>(&b.rep)) {
    const Eigen::Index m = poly->vertices.cols();
    KahanSum acc;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Vector2d v0 = poly->vertices.col(i), v1 = poly->vertices.col((i + 1) % m);
      const double area = 0.5 * (v0(0) * v1(1) - v0(1) * v1(0));
      acc.add(2.0 * area / (p + 2.0) * J_segment(y.dot(v0), y.dot(v1), p));
    }
    return acc.value();
  }
  if (d == 1) {
    Eigen::VectorXd e(1);
    e << 1.0;
    const double R = radial(body, e);
    return 2.0 * std::pow(R, p + 1.0) * std::pow(std::abs(y(0)), p) / (p + 1.0);
  }
  const double ny = y.norm();
  if (ny == 0.0) return 0.0;
  const Eigen::VectorXd u = y / ny;
  if (d == 2) {
    // int_{S^1} r^{p+2}/(p+2) |<y,theta>|^p; symmetric body, integrate over the half
    // circle where <u,theta> > 0 with composite Gauss-Legendre (kink-free there).
    const double phi_u = std::atan2(u(1), u(0));
    if (std::holds_alternative<Tabulated2D>(b.rep)) {
      // smooth radial function: double-exponential rule absorbs the cos^p endpoint behaviour
      static const Rule1D ts = tanh_sinh(-0.5 * kPi, 0.5 * kPi, 6);
      KahanSum acc;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double c = std::cos(ts.x[i]);
        if (c <= 0.0) continue;
        acc.add(ts.w[i] * std::pow(tabulated_radial(b, phi_u + ts.x[i]), p + 2.0) * std::pow(c, p));
      }
      return 2.0 * std::pow(ny, p) * acc.value() / (p + 2.0);
    }
    auto f = [&](double s) {
      const double r = radial(body, v2(std::cos(phi_u + s), std::sin(phi_u + s)));
      return std::pow(r, p + 2.0) * std::pow(std::cos(s), p);
    };
    const double half = adaptive_gk(f, -0.5 * kPi, 0.0, 1e-13) + adaptive_gk(f, 0.0, 0.5 * kPi, 1e-13);
    return 2.0 * std::pow(ny, p) * half / (p + 2.0);
  }
  // d >= 3: polar axis along u; theta = cos(v) u + sin(v) omega, omega in S^{d-2} orthogonal to u
  const Eigen::MatrixXd T = tangent_basis(u);
  std::vector<double> x, w;
  gauss_legendre_nodes(32, x, w);
  const SphereRule om = sphere_rule(d - 2, 32);
  KahanSum acc;
  for (int i = 0; i < 32; ++i) {
    const double v = 0.25 * kPi * (x[i] + 1.0);  // (0, pi/2)
    const double c = std::cos(v), s = std::sin(v);
    for (Eigen::Index k = 0; k < om.size(); ++k) {
      const Eigen::VectorXd th = c * u + s * (T * om.nodes.col(k));
      const double r = radial(body, th);
      acc.add(0.25 * kPi * w[i] * om.weights(k) * std::pow(s, d - 2) * std::pow(c, p) * std::pow(r, d + p));
    }
  }
  return 2.0 * std::pow(ny, p) * acc.value() / (d + p);
}

ConvexBody centroid_body(const ConvexBody& body, double p) {
  if (!(p >= 1.0)) throw DomainError("centroid_body: p must be >= 1");
  const int d = body.dim();
  const double a = a_np(double(d), p);
  const auto& b = body.impl();
  if (std::holds_alternative<Ellipsoid>(b.rep)) {
    const double kappa = std::pow(ball_moment(d, p) / (a * ball_volume(double(d))), 1.0 / p);
    return ConvexBody(Ellipsoid{b.B / kappa});
  }
  const double vol = volume(body);
  if (p == 2.0) {
    Eigen::MatrixXd S(d, d);
    for (int i = 0; i < d; ++i) {
      S(i, i) = moment(body, Eigen::VectorXd::Unit(d, i), 2.0);
      for (int j = 0; j < i; ++j) {
        const Eigen::VectorXd ep = Eigen::VectorXd::Unit(d, i) + Eigen::VectorXd::Unit(d, j);
        const Eigen::VectorXd em = Eigen::VectorXd::Unit(d, i) - Eigen::VectorXd::Unit(d, j);
        S(i, j) = S(j, i) = 0.25 * (moment(body, ep, 2.0) - moment(body, em, 2.0));
      }
    }
    S /= a * vol;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw NonConvergence("centroid_body: second-moment matrix not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    return ConvexBody(Ellipsoid{L.inverse()});
  }
  const double norm = 1.0 / (a * vol);
  return ConvexBody(SupportBody{d, [body, p, norm](const Eigen::VectorXd& y) {
                                  return std::pow(norm * moment(body, y, p), 1.0 / p);
                                }});
}

BpResult bp_check(const ConvexBody& body, double p, double tol) {
  BpResult r;
  r.vol_K = volume(body);
  r.vol_GpK = volume(centroid_body(body, p));
  r.ratio = r.vol_GpK / r.vol_K;
  r.pass = r.ratio >= 1.0 - tol;
  return r;
}

SphereMax maximize_on_sphere(int d, const ScalarField& F, const Eigen::VectorXd* halfspace) {
  const Eigen::MatrixXd grid = direction_grid(d);
  Eigen::Index best = -1;
  double bestv = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < grid.cols(); ++k) {
    if (halfspace && !(grid.col(k).dot(*halfspace) > 0.0)) continue;
    const double v = F(grid.col(k));
    if (v > bestv) {
      bestv = v;
      best = k;
    }
  }
  if (best < 0) throw NonConvergence("maximize_on_sphere: no admissible grid direction");
  auto G = [&](const Eigen::VectorXd& th) {
    if (halfspace && !(th.dot(*halfspace) > 0.0)) return -std::numeric_limits<double>::infinity();
    return F(th);
  };
  return refine_on_sphere(G, grid.col(best), bestv, grid_spacing(d, grid.cols()));
}

HomogeneousConvexFn legendre_transform(const HomogeneousConvexFn& C) {
  if (!(C.degree > 1.0)) throw DomainError("legendre_transform: degree must exceed 1");
  const double q = C.degree;
  const double p = q / (q - 1.0);
  auto cache = std::make_shared<CachedSphereFn>();
  cache->dim = C.dim;
  cache->fn = C.eval;
  HomogeneousConvexFn out;
  out.dim = C.dim;
  out.degree = p;
  out.eval = [cache, p, q](const Eigen::VectorXd& y) {
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    // maximize <u,theta>^p (q C(theta))^{1-p} / p for the unit direction u, then scale by |y|^p
    const Eigen::VectorXd u = y / ny;
    const auto m = cache->maximize(u, [p, q](double s, double c) {
      return std::exp(p * std::log(s) + (1.0 - p) * std::log(q * c)) / p;
    });
    return std::pow(ny, p) * m.value;
  };
  return out;
}

namespace {

// ||y||_r and its gradient (r in (1, inf)).
double lr_norm_grad(const Eigen::VectorXd& y, double r, Eigen::VectorXd* g) {
  const double nr = lq_norm(y, r);
  if (g) {
    g->resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      (*g)(i) = nr == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(y(i)) / nr, r - 1.0), y(i));
  }
  return nr;
}

HomogeneousConvexFn norm_power(const Eigen::MatrixXd& M, double degree, double r) {
  const int d = static_cast<int>(M.rows());
  HomogeneousConvexFn out;
  out.dim = d;
  out.degree = degree;
  out.eval = [M, degree, r](const Eigen::VectorXd& y) { return std::pow(lr_norm_grad(M * y, r, nullptr), degree) / degree; };
  out.grad = [M, degree, r](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    Eigen::VectorXd g;
    const double nr = lr_norm_grad(M * y, r, &g);
    return std::pow(nr, degree - 1.0) * (M.transpose() * g);
  };
  return out;
}

}  // namespace

ConjugatePair norm_power_pair(const Eigen::MatrixXd& B, double q, double r) {
  if (!(q > 1.0) || !(r > 1.0) || !std::isfinite(r)) throw DomainError("norm_power_pair: need q > 1 and 1 < r < inf");
  if (B.rows() != B.cols()) throw DomainError("norm_power_pair: B must be square");
  const double p = q / (q - 1.0), rs = r / (r - 1.0);
  const Eigen::MatrixXd BinvT = B.inverse().transpose();
  return {norm_power(B, q, r), norm_power(BinvT, p, rs)};
}

ConvexBody body_from_C(const HomogeneousConvexFn& C) {
  const double q = C.degree;
  auto eval = C.eval;
  return ConvexBody(GaugeBody{C.dim, [eval, q](const Eigen::VectorXd& y) {
                                const double v = eval(y);
                                return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / q);
                              }});
}

bool check_gauge_axioms(const ConvexBody& body, int samples, std::uint64_t seed, double tol) {
  CounterRng rng(seed);
  const int d = body.dim();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd y1(d), y2(d);
    for (int i = 0; i < d; ++i) {
      y1(i) = rng.normal();
      y2(i) = rng.normal();
    }
    const double lam = 0.1 + 5.0 * rng.uniform();
    const double g1 = gauge(body, y1), g2 = gauge(body, y2);
    if (!(g1 > 0.0)) return false;
    if (std::abs(gauge(body, lam * y1) - lam * g1) > tol * lam * g1) return false;
    if (std::abs(gauge(body, -y1) - g1) > tol * g1) return false;
    if (gauge(body, 0.5 * (y1 + y2)) > 0.5 * (g1 + g2) * (1.0 + tol)) return false;
  }
  return true;
}

// Random origin-symmetric polygon: 2m vertices at sorted angles, radii in [0.5, 1.5], convex hull.
ConvexBody random_symmetric_polygon(CounterRng& rng) {
  const int m = 3 + static_cast<int>(rng.uniform() * 5);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < m; ++i) {
    const double ang = std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / m;
    const double r = rng.uniform(0.5, 1.5);
    pts.emplace_back(r * std::cos(ang), r * std::sin(ang));
  }
  for (int i = 0; i < m; ++i) pts.push_back(-pts[i]);
  // monotone hull on angle-sorted points (already sorted, around origin): drop reflex vertices
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t k = pts.size();
    for (std::size_t i = 0; i < k; ++i) {
      const Eigen::Vector2d a = pts[(i + k - 1) % k], b = pts[i], c = pts[(i + 1) % k];
      const double cross = (b - a).x() * (c - b).y() - (b - a).y() * (c - b).x();
      if (cross <= 1e-12) {
        pts.erase(pts.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  Eigen::Matrix2Xd v(2, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = pts[i];
  return ConvexBody(Polygon{v});
}


}  // namespace affsob
