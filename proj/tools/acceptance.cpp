// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "affsob/convex_geometry.hpp"
#include "affsob/errors.hpp"
#include "affsob/random.hpp"
#include "affsob/sharp_constants.hpp"
#include "affsob/verifier.hpp"
#include "commands.hpp"

using namespace affsob;

namespace {

constexpr std::uint64_t kSeed = 0xACCE55ULL;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Grid {
  int n;
  double p, a;
};

std::vector<Grid> default_grid(std::vector<double> ps = {1.5, 2.0, 3.0}) {
  std::vector<Grid> g;
  for (int n : {2, 3})
    for (double p : ps)
      for (double a : {0.0, 1.0})
        if (p < n + a) g.push_back({n, p, a});
  return g;
}

Params params_of(const Grid& g, std::optional<double> alpha = std::nullopt) { return Params{g.n, g.p, g.a, alpha}; }

std::string key(const Grid& g) {
  std::ostringstream os;
  os << "n=" << g.n << ",p=" << g.p << ",a=" << g.a;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  int count = 0;
  for (int n : {2, 3, 4})
    for (double p : {1.25, 1.5, 2.0, 3.0})
      for (double a : {0.0, 0.5, 1.0, 2.0}) {
        std::vector<std::pair<ConstantName, Params>> todo;
        Params P{n, p, a, std::nullopt};
        // every affine constant carries the factor R_cal, defined for p < n + a
        if (!(p < n + a)) continue;
        for (ConstantName c : {ConstantName::R_cal, ConstantName::S_cal, ConstantName::K_cal, ConstantName::L_cal})
          todo.push_back({c, P});
        for (double al : {0.5, 1.5, 2.0}) {
          Params Q{n, p, a, al};
          if (al > Q.alpha_max()) continue;
          todo.push_back({al < 1.0 ? ConstantName::N_cal : ConstantName::G_cal, Q});
        }
        for (const auto& [name, Q] : todo) {
          const ConstantValue v = constant_value(name, Q);
          ++count;
          if (!(v.rel_gap <= worst)) {
            worst = v.rel_gap;
            where = std::string(to_string(name)) + " " + Q.to_string();
          }
        }
      }
  const double t = since(t0);
  return {worst < 1e-10 && t < 5.0, std::to_string(count) + " constants, worst gap " + sci(worst) + " (" + where +
                                        "), " + sci(t) + " s"};
}

Outcome c2() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_crs = 0.0, worst_bgl = 0.0, worst_printed = 0.0;
  for (int n : {2, 3, 4})
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      for (double p : {1.25, 1.5, 2.0, 3.0})
        if (p < n + a) worst_crs = std::max(worst_crs, constant_value(ConstantName::S_crs, Params{n, p, a, {}}).rel_gap);
      if (n + a > 2.0) worst_bgl = std::max(worst_bgl, constant_value(ConstantName::S_bgl, Params{n, 2.0, a, {}}).rel_gap);
      const double expect = std::pow(std::numbers::pi, -(a + 1.0) / 2.0);
      worst_printed = std::max(worst_printed, std::abs(halfball_printed_ratio(n, a) / expect - 1.0));
    }
  const double t = since(t0);
  return {worst_crs < 1e-10 && worst_bgl < 1e-10 && worst_printed < 1e-12 && t < 1.0,
          "S(n,a,p) chain " + sci(worst_crs) + ", S(n,2,a)=S(n,a) " + sci(worst_bgl) +
              ", printed/derived half-ball volume = pi^{-(a+1)/2} to " + sci(worst_printed) + ", " + sci(t) + " s"};
}

Outcome c3() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(kSeed);
  double min_poly = 1e300;
  for (int i = 0; i < 200; ++i) {
    const ConvexBody K = random_symmetric_polygon(rng);
    for (double p : {1.0, 2.0, 3.0}) min_poly = std::min(min_poly, bp_check(K, p).ratio);
  }
  double ell = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::MatrixXd B(2, 2);
    B << rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0);
    const ConvexBody E(Ellipsoid{B});
    for (double p : {1.0, 2.0, 3.0}) ell = std::max(ell, std::abs(bp_check(E, p).ratio - 1.0));
  }
  const double sq = std::abs(volume(centroid_body(ConvexBody::cube(2), 2.0)) - 4.0 * std::numbers::pi / 3.0);
  const double t = since(t0);
  return {min_poly >= 1.0 - 1e-9 && ell < 1e-5 && sq < 1e-6 && t < 60.0,
          "min polygon ratio " + std::to_string(min_poly) + " (600 checks), ellipse |ratio-1| " + sci(ell) +
              ", |vol G2(square) - 4pi/3| " + sci(sq) + ", " + sci(t) + " s"};
}

Outcome c4() {
  CounterRng rng(kSeed + 1);
  bool ok = true;
  std::string detail;
  for (int d = 1; d <= 3; ++d) {
    double dev = 0.0;
    for (double p : {1.0, 2.0, 3.0}) {
      const ConvexBody G = centroid_body(ConvexBody::ball(d), p);
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd u(d);
        for (int i = 0; i < d; ++i) u(i) = rng.normal();
        u.normalize();
        dev = std::max(dev, std::abs(support(G, u) - 1.0));
      }
    }
    const double lim = d <= 2 ? 1e-6 : 1e-4;
    ok = ok && dev < lim;
    detail += "d=" + std::to_string(d) + ": " + sci(dev) + (d < 3 ? ", " : "");
  }
  return {ok, "max support deviation " + detail};
}

// Main-lemma residuals on the function battery, shared by criteria 5 and 6.
struct LemmaRun {
  std::map<std::string, double> worst;  // residual name -> max value
  std::map<std::string, double> worst_n3;
  std::vector<std::string> errors;
};

const LemmaRun& lemma_battery() {
  static const LemmaRun run = [] {
    LemmaRun out;
    std::uint64_t counter = 0;
    for (const Grid& g : default_grid()) {
      const Params P = params_of(g);
      const std::uint64_t s = counter_hash(kSeed, counter++);
      const std::vector<TestFunction> fns = {sobolev_extremal(P, 1.0, random_frame(g.n, s)),
                                             gaussian(g.n, 1.0, random_frame(g.n, s + 1)), sech_product(g.n)};
      for (const TestFunction& f : fns) {
        try {
          const DeficitReport r = verify_main_lemma(f, P);
          for (const Residual& e : r.extras) {
            const double v = std::abs(e.value);
            out.worst[e.name] = std::max(out.worst[e.name], v);
            if (g.n == 3) out.worst_n3[e.name] = std::max(out.worst_n3[e.name], v);
          }
        } catch (const std::exception& e) {
          out.errors.push_back(key(g) + " " + f.profile->family + ": " + e.what());
        }
      }
    }
    return out;
  }();
  return run;
}

Outcome c5() {
  CounterRng rng(kSeed + 2);
  double conj = 0.0, bic = 0.0;
  for (int d : {2, 3})
    for (double p : {1.5, 2.0, 3.0}) {
      const double q = p / (p - 1.0);
      const HomogeneousConvexFn Cs = legendre_transform(norm_power_pair(Eigen::MatrixXd::Identity(d, d), q).C);
      Eigen::MatrixXd B = Eigen::MatrixXd::Identity(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) B(i, j) += 0.3 * rng.uniform(-1.0, 1.0);
      const HomogeneousConvexFn C4 = norm_power_pair(B, q, 4.0).C;
      const HomogeneousConvexFn CC = legendre_transform(legendre_transform(C4));
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd y(d);
        for (int i = 0; i < d; ++i) y(i) = rng.normal();
        const double exact = std::pow(y.norm(), p) / p;
        conj = std::max(conj, std::abs(Cs.eval(y) - exact) / exact);
        bic = std::max(bic, std::abs(CC.eval(y) - C4.eval(y)) / C4.eval(y));
      }
    }
  const LemmaRun& L = lemma_battery();
  const double prod = L.worst.count("product_form") ? L.worst.at("product_form") : INFINITY;
  return {conj < 1e-6 && bic < 1e-4 && prod < 1e-4 && L.errors.empty(),
          "conjugate of |x|^q/q " + sci(conj) + ", biconjugation " + sci(bic) + ", product form " + sci(prod) +
              (L.errors.empty() ? "" : ", errors: " + L.errors.front())};
}

Outcome c6() {
  const LemmaRun& L = lemma_battery();
  auto w = [](const std::map<std::string, double>& m, const char* k) { return m.count(k) ? m.at(k) : INFINITY; };
  const double eq = w(L.worst, "volume_Z_identity");
  const double k36 = w(L.worst_n3, "K0_L_volume");
  const double fc = std::max(w(L.worst, "first_compute_Dstar"), w(L.worst, "first_compute_Cstar"));
  return {eq < 1e-8 && k36 < 1e-3 && fc < 1e-4 && L.errors.empty(),
          "(n-1) vol(L_f) Z^{n-1} = 1 to " + sci(eq) + ", K_{f,0}/L_f volume at n=3 " + sci(k36) +
              ", first-compute identities " + sci(fc)};
}

Outcome c7() {
  struct Tally {
    int n = 0, pass = 0, pass_corrected = 0;
    double worst = 0.0, worst_corrected = 0.0, worst_time = 0.0;
  };
  std::map<std::string, Tally> tally;
  std::vector<std::string> order = {"sobolev", "corollary", "gn_a", "gn_b", "entropy"};
  auto record = [&](const std::string& name, double tol, const std::function<DeficitReport()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    Tally& T = tally[name];
    ++T.n;
    try {
      const DeficitReport r = run();
      const double t = since(t0);
      const double dev = std::abs(r.ratio_printed - 1.0), devc = std::abs(r.ratio_corrected - 1.0);
      T.worst = std::max(T.worst, dev);
      T.worst_corrected = std::max(T.worst_corrected, devc);
      T.worst_time = std::max(T.worst_time, t);
      if (dev < tol && t < 60.0) ++T.pass;
      if (devc < tol && t < 60.0) ++T.pass_corrected;
    } catch (const std::exception&) {
      T.worst = INFINITY;
    }
  };
  std::uint64_t counter = 0;
  for (const Grid& g : default_grid({1.5, 2.0})) {
    const Params P = params_of(g);
    const std::uint64_t s = counter_hash(kSeed + 3, counter++);
    record("sobolev", 5e-3, [&] { return verify_sobolev(sobolev_extremal(P, 1.0, random_frame(g.n, s)), P); });
    record("corollary", 5e-3, [&] {
      Frame fr = random_frame(g.n, s + 1);
      fr.lambda = std::pow(fr.B.determinant(), 1.0 / (g.n - 1));
      return verify_corollary(sobolev_extremal(P, 1.0, fr), P);
    });
    const Params Pa = params_of(g, 1.0 + 0.5 * (P.alpha_max() - 1.0));
    record("gn_a", 1e-2, [&] { return verify_gn(gn_extremal(Pa, 1.0, random_frame(g.n, s + 2)), Pa, GnCase::a); });
    const Params Pb = params_of(g, 0.5);
    record("gn_b", 1e-2, [&] { return verify_gn(gn_extremal(Pb, 1.0, random_frame(g.n, s + 3)), Pb, GnCase::b); });
    record("entropy", 1e-2, [&] { return verify_entropy(entropy_extremal(P, 1.0, random_frame(g.n, s + 4)), P); });
  }
  bool ok = true;
  std::string detail;
  for (const auto& name : order) {
    const Tally& T = tally[name];
    ok = ok && T.pass == T.n;
    detail += name + " " + std::to_string(T.pass) + "/" + std::to_string(T.n) + " (max |ratio-1| " + sci(T.worst);
    if (T.pass_corrected != T.pass || T.worst_corrected != T.worst)
      detail += "; with extremal-corrected constant " + std::to_string(T.pass_corrected) + "/" + std::to_string(T.n) +
                ", " + sci(T.worst_corrected);
    detail += ")";
    if (name != order.back()) detail += ", ";
  }
  return {ok, detail};
}

Outcome c8() {
  double min_gauss = INFINITY, min_slack = INFINITY, n2_dev = 0.0;
  std::uint64_t counter = 0;
  for (const Grid& g : default_grid()) {
    const Params P = params_of(g);
    const std::uint64_t s = counter_hash(kSeed + 4, counter++);
    min_gauss = std::min(min_gauss, verify_sobolev(gaussian(g.n, 1.0, random_frame(g.n, s)), P).ratio);
    const std::vector<TestFunction> fns = {sobolev_extremal(P, 1.0, random_frame(g.n, s + 1)),
                                           gaussian(g.n, 1.0, random_frame(g.n, s + 2)), gaussian(g.n),
                                           sech_product(g.n), sech_product(g.n, 1.0, random_frame(g.n, s + 3))};
    for (const TestFunction& f : fns) {
      const DeficitReport r = verify_stronger(f, P);
      min_slack = std::min(min_slack, r.deficit / r.lhs);
      if (g.n == 2) n2_dev = std::max(n2_dev, std::abs(r.ratio - 1.0));
    }
  }
  return {min_gauss >= 1.0 + 1e-3 && min_slack >= -1e-8 && n2_dev < 1e-10,
          "min Gaussian Sobolev ratio " + std::to_string(min_gauss) + ", min relative slack E_p vs full gradient " +
              sci(min_slack) + ", n=2 |ratio-1| " + sci(n2_dev)};
}

Outcome c9() {
  struct Worst {
    double printed = 0.0, corrected = 0.0;
    bool has_corrected = false;
  };
  std::map<std::string, Worst> worst;
  std::vector<std::string> order;
  double ratio_dev = 0.0;
  for (const Grid& g : default_grid()) {
    const Params P = params_of(g);
    const TestFunction f = sech_product(g.n);
    for (int i = 0; i < 20; ++i) {
      const auto [lambda, B] = random_block(g.n, counter_hash(kSeed + 5, static_cast<std::uint64_t>(100 * g.n + 10 * g.p + g.a) * 64 + i));
      const InvarianceReport rep = verify_invariance(f, P, lambda, B);
      for (const auto& row : rep.rows) {
        if (!worst.count(row.identity)) order.push_back(row.identity);
        Worst& w = worst[row.identity];
        w.printed = std::max(w.printed, row.printed_residual);
        if (!std::isnan(row.corrected_residual)) {
          w.has_corrected = true;
          w.corrected = std::max(w.corrected, row.corrected_residual);
        }
      }
      if (i == 0) {
        // report ratios of the GN and entropy inequalities before and after the pullback
        const TestFunction fa = affine_pullback(f, lambda, B);
        const Params Pa = params_of(g, 1.0 + 0.5 * (P.alpha_max() - 1.0)), Pb = params_of(g, 0.5);
        auto dev = [](const DeficitReport& x, const DeficitReport& y) { return std::abs(y.ratio / x.ratio - 1.0); };
        ratio_dev = std::max(ratio_dev, dev(verify_gn(f, Pa, GnCase::a), verify_gn(fa, Pa, GnCase::a)));
        ratio_dev = std::max(ratio_dev, dev(verify_gn(f, Pb, GnCase::b), verify_gn(fa, Pb, GnCase::b)));
        ratio_dev = std::max(ratio_dev, dev(verify_entropy(f, P), verify_entropy(fa, P)));
      }
    }
  }
  bool ok = ratio_dev < 1e-4;
  std::string failing, holding;
  for (const auto& id : order) {
    const Worst& w = worst[id];
    if (w.printed < 1e-4) {
      holding += (holding.empty() ? "" : ", ") + id;
      continue;
    }
    ok = false;
    failing += (failing.empty() ? "" : "; ") + id + " " + sci(w.printed);
    if (w.has_corrected) failing += " (corrected law " + sci(w.corrected) + ")";
  }
  std::string detail = "hold < 1e-4: " + holding;
  if (!failing.empty()) detail += "; violated as stated: " + failing;
  detail += "; GN/entropy ratio change under pullback " + sci(ratio_dev);
  return {ok, detail};
}

Outcome c10() {
  double worst = 0.0;
  for (int n : {2, 3})
    for (double a : {0.0, 1.0}) {
      const double S = limit_p_to_1(ConstantName::S_cal, n, a);
      worst = std::max(worst, std::abs(limit_p_to_1(ConstantName::G_cal, n, a, 2.0) / S - 1.0));
      worst = std::max(worst, std::abs(limit_p_to_1(ConstantName::N_cal, n, a, 0.5) / S - 1.0));
    }
  double ind = 0.0;
  std::uint64_t counter = 0;
  for (int n : {2, 3})
    for (double a : {0.0, 1.0}) {
      const DeficitReport r =
          verify_sobolev_p1(n, a, IndicatorShape::cylinder, random_frame(n, counter_hash(kSeed + 6, counter++)));
      ind = std::max(ind, std::abs(r.ratio - 1.0));
    }
  return {worst < 1e-3 && ind < 2e-2,
          "G/N limits vs S limit " + sci(worst) + ", smoothed-indicator ratio extrapolated |ratio-1| " + sci(ind)};
}

Outcome c11() {
  cli::SelftestArgs args;
  const cli::SelftestOutput a = cli::run_selftest(args);
  const cli::SelftestOutput b = cli::run_selftest(args);
  const bool same = a.json == b.json && a.csv == b.csv;
  return {same, std::string(same ? "byte-identical" : "outputs differ") + " JSON (" + std::to_string(a.json.size()) +
                    " bytes) and CSV (" + std::to_string(a.csv.size()) + " bytes); selftest " +
                    std::to_string(a.cases) + " cases, " + std::to_string(a.failures) + " failures"};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu: %s  [%.1f s]  %s\n", i + 1, o.pass ? "PASS" : "FAIL", since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
