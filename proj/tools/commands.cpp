#include "commands.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "affsob/convex_geometry.hpp"
#include "affsob/errors.hpp"
#include "affsob/random.hpp"
#include "affsob/version.hpp"

namespace affsob::cli {

namespace {

Json tool_json() { return {{"name", "affsob"}, {"version", kVersion}}; }

Json budget_config(const Budget& b) {
  return {{"scheme", b.scheme},
          {"level", b.level},
          {"sphere_resolution", b.sphere_resolution},
          {"xi_resolution", b.xi_resolution},
          {"truncation_radius", b.truncation_radius},
          {"node_budget", b.node_budget},
          {"seed", b.seed}};
}

Json opt_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

VerifyOptions verify_options(const Budget& b, bool corrected, std::optional<double> tol) {
  VerifyOptions opt;
  opt.functional = functional_options(b);
  opt.corrected_constants = corrected;
  opt.rel_tolerance = tol;
  return opt;
}

NguyenKind nguyen_kind(const std::string& s) {
  if (s == "nguyen_sobolev") return NguyenKind::sobolev;
  if (s == "nguyen_gn_a") return NguyenKind::gn_a;
  if (s == "nguyen_gn_b") return NguyenKind::gn_b;
  if (s == "nguyen_entropy") return NguyenKind::entropy;
  throw ConfigError("unknown inequality '" + s + "'");
}

}  // namespace

FunctionalOptions functional_options(const Budget& b) {
  FunctionalOptions o;
  if (b.scheme == "polar")
    o.rule.scheme = HalfSpaceScheme::polar;
  else if (b.scheme == "tensor_gauss")
    o.rule.scheme = HalfSpaceScheme::tensor_gauss;
  else if (b.scheme == "monte_carlo")
    o.rule.scheme = HalfSpaceScheme::monte_carlo;
  else if (b.scheme == "map_to_cube")
    o.rule.scheme = HalfSpaceScheme::map_to_cube;
  else
    throw ConfigError("--scheme: unknown scheme '" + b.scheme + "'");
  if (b.level < 1 || b.level > 8) throw ConfigError("--level: expected 1..8");
  if (b.sphere_resolution < 2) throw ConfigError("--sphere-resolution: expected at least 2");
  if (b.xi_resolution < 0) throw ConfigError("--xi-resolution: expected a non-negative value");
  if (!(b.truncation_radius > 0.0)) throw ConfigError("--truncation-radius: expected a positive value");
  if (b.node_budget < 1000) throw ConfigError("--node-budget: expected at least 1000");
  o.rule.level = b.level;
  o.rule.sphere_resolution = b.sphere_resolution;
  o.rule.truncation_radius = b.truncation_radius;
  o.rule.node_budget = b.node_budget;
  o.rule.seed = b.seed;
  o.xi_resolution = b.xi_resolution;
  return o;
}

// ---------------------------------------------------------------------------

int cmd_constants(const ConstantsArgs& args, std::ostream& out) {
  Params P{args.n, args.p, args.a, args.alpha};
  if (args.alpha && *args.alpha == 1.0) throw DomainError("--alpha: alpha must differ from 1");
  if (args.alpha && !(*args.alpha > 0.0)) throw DomainError("--alpha: alpha must be positive");
  if (P.n < 2) throw DomainError("--n: n must be at least 2");
  if (P.a < 0.0) throw DomainError("--a: a must be non-negative");

  Json doc;
  doc["tool"] = tool_json();
  Json config = {{"command", "constants"}, {"n", P.n}, {"a", P.a}, {"alpha", opt_json(P.alpha)}};
  int status = 0;

  if (args.limit_p1) {
    config["limit_p1"] = true;
    doc["config"] = config;
    std::vector<ConstantName> names = {ConstantName::S_cal, ConstantName::L_cal};
    if (P.alpha) names.push_back(*P.alpha > 1.0 ? ConstantName::G_cal : ConstantName::N_cal);
    Json rows = Json::array();
    const double S = limit_p_to_1(ConstantName::S_cal, P.n, P.a);
    for (ConstantName name : names) {
      const double v = limit_p_to_1(name, P.n, P.a, P.alpha);
      rows.push_back({{"name", std::string(to_string(name))}, {"limit", v}, {"rel_diff_to_S_cal", std::abs(v - S) / S}});
    }
    doc["limits"] = rows;
    out << doc.dump(2) << '\n';
    return 0;
  }

  config["p"] = P.p;
  doc["config"] = config;
  P.validate_sobolev();
  std::vector<ConstantName> names = {ConstantName::S_crs, ConstantName::S_nguyen};
  if (P.p == 2.0) names.push_back(ConstantName::S_bgl);
  names.insert(names.end(), {ConstantName::R_cal, ConstantName::S_cal, ConstantName::K_cal});
  if (P.p > 1.0) names.insert(names.end(), {ConstantName::L_nguyen, ConstantName::L_cal});
  if (P.alpha) {
    P.validate_gn();
    if (P.p > 1.0) names.push_back(*P.alpha > 1.0 ? ConstantName::G_nguyen : ConstantName::N_nguyen);
    names.push_back(*P.alpha > 1.0 ? ConstantName::G_cal : ConstantName::N_cal);
  }
  Json rows = Json::array();
  for (ConstantName name : names) {
    const ConstantValue v = constant_value(name, P);
    if (v.flagged) status = 1;
    rows.push_back(to_json(v));
  }
  doc["constants"] = rows;
  doc["halfball_printed_ratio"] = halfball_printed_ratio(P.n, P.a);
  out << doc.dump(2) << '\n';
  return status;
}

// ---------------------------------------------------------------------------

DeficitReport run_verify(const std::string& ineq, const Json& spec, const Params& params, const VerifyOptions& opt) {
  if (ineq == "sobolev_p1") {
    IndicatorShape shape = IndicatorShape::cylinder;
    if (spec.contains("shape") && spec["shape"] == "ball") shape = IndicatorShape::ball;
    Frame frame;
    if (spec.contains("frame")) frame = frame_from_json(spec["frame"], params.n);
    return verify_sobolev_p1(params.n, params.a, shape, frame, {0.1, 0.05, 0.025}, opt);
  }
  const TestFunction f = function_from_json(spec, params);
  if (ineq == "sobolev") return verify_sobolev(f, params, opt);
  if (ineq == "corollary") return verify_corollary(f, params, opt);
  if (ineq == "stronger") return verify_stronger(f, params, opt);
  if (ineq == "main_lemma") return verify_main_lemma(f, params, opt);
  if (ineq == "entropy") return verify_entropy(f, params, opt);
  if (ineq == "gn" || ineq == "gn_a" || ineq == "gn_b") {
    if (!params.alpha) throw ConfigError("/alpha: required for " + ineq);
    GnCase which = *params.alpha > 1.0 ? GnCase::a : GnCase::b;
    if (ineq == "gn_a") which = GnCase::a;
    if (ineq == "gn_b") which = GnCase::b;
    return verify_gn(f, params, which, opt);
  }
  const NguyenKind kind = nguyen_kind(ineq);
  if (!(params.p > 1.0)) throw DomainError(ineq + ": requires p > 1");
  const ConjugatePair pair = spec.contains("C") ? conjugate_pair_from_json(spec["C"], params.n, params.q())
                                                : norm_power_pair(Eigen::MatrixXd::Identity(params.n, params.n), params.q());
  return verify_nguyen(f, pair.C, pair.Cstar, params, kind, opt);
}

namespace {

Params merged_params(const Json& spec, std::optional<int> n, std::optional<double> p, std::optional<double> a,
                     std::optional<double> alpha) {
  Json j = spec;
  if (n) j["n"] = *n;
  if (p) j["p"] = *p;
  if (a) j["a"] = *a;
  if (alpha) j["alpha"] = *alpha;
  return params_from_json(j);
}

}  // namespace

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
  const Json spec = read_json_file(args.function_path);
  const Params P = merged_params(spec, args.n, args.p, args.a, args.alpha);
  const VerifyOptions opt = verify_options(args.budget, args.corrected_constants, args.tolerance);
  const DeficitReport r = run_verify(args.inequality, spec, P, opt);
  Json doc;
  doc["tool"] = tool_json();
  doc["config"] = {{"command", "verify"},
                   {"inequality", args.inequality},
                   {"function", spec},
                   {"params", to_json(P)},
                   {"corrected_constants", args.corrected_constants},
                   {"tolerance", opt_json(args.tolerance)},
                   {"budget", budget_config(args.budget)}};
  doc["report"] = to_json(r);
  out << doc.dump(2) << '\n';
  return r.pass ? 0 : 1;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
  const Json spec = read_json_file(args.function_path);
  const VerifyOptions opt = verify_options(args.budget, args.corrected_constants, std::nullopt);
  SuiteReport suite;
  for (int n : args.n_values)
    for (double p : args.p_values)
      for (double a : args.a_values) {
        const Params P = merged_params(spec, n, p, a, args.alpha ? args.alpha : std::optional<double>());
        const std::string key = "n=" + std::to_string(n) + ",p=" + format_real(p) + ",a=" + format_real(a);
        DeficitReport r;
        try {
          r = run_verify(args.inequality, spec, P, opt);
        } catch (const DomainError&) {
          continue;  // outside the admissible range of this inequality
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          r.inequality = args.inequality;
          r.params = P;
          r.notes = std::string("error: ") + e.what();
        }
        if (!r.pass) ++suite.failures;
        suite.cases.emplace_back(key, std::move(r));
      }
  Json config = {{"command", "sweep"},          {"inequality", args.inequality}, {"function", spec},
                 {"n", args.n_values},          {"p", args.p_values},            {"a", args.a_values},
                 {"alpha", opt_json(args.alpha)}, {"corrected_constants", args.corrected_constants},
                 {"budget", budget_config(args.budget)}, {"tool", tool_json()}};
  out << "# " << config.dump() << '\n' << suite_csv(suite);
  return suite.failures ? 1 : 0;
}

int cmd_centroid(const CentroidArgs& args, std::ostream& out) {
  std::vector<std::pair<std::string, ConvexBody>> bodies;
  for (const auto& path : args.body_paths) bodies.emplace_back(path, body_from_json(read_json_file(path)));
  CounterRng rng(args.seed);
  for (int i = 0; i < args.random_polygons; ++i)
    bodies.emplace_back("random_polygon[" + std::to_string(i) + "]", random_symmetric_polygon(rng));
  if (bodies.empty()) throw ConfigError("centroid: give --body or --random");
  for (double p : args.p_values)
    if (!(p >= 1.0)) throw ConfigError("--p: p must be at least 1");

  Json config = {{"command", "centroid"}, {"body", args.body_paths}, {"p", args.p_values},
                 {"random", args.random_polygons}, {"seed", args.seed}, {"tool", tool_json()}};
  out << "# " << config.dump() << '\n' << "body,p,vol_K,vol_GpK,ratio,pass\n";
  int status = 0;
  for (const auto& [name, K] : bodies)
    for (double p : args.p_values) {
      const BpResult r = bp_check(K, p);
      if (!r.pass) status = 1;
      out << name << ',' << format_real(p) << ',' << format_real(r.vol_K) << ',' << format_real(r.vol_GpK) << ','
          << format_real(r.ratio) << ',' << (r.pass ? 1 : 0) << '\n';
    }
  return status;
}

int cmd_invariance(const InvarianceArgs& args, std::ostream& out) {
  Params P{args.n, args.p, args.a, std::nullopt};
  P.validate_sobolev();
  if (!(P.p > 1.0)) throw DomainError("--p: invariance needs p > 1");
  if (args.count < 1) throw ConfigError("--count: expected at least 1");
  Json spec = {{"family", "sech_product"}};
  if (!args.function_path.empty()) spec = read_json_file(args.function_path);
  const TestFunction f = function_from_json(spec, P);
  VerifyOptions opt;
  opt.functional = functional_options(args.budget);

  struct Worst {
    double printed = 0.0, corrected = 0.0;
    bool has_corrected = false;
  };
  std::map<std::string, Worst> worst;
  std::vector<std::string> order;
  Json cases = Json::array();
  for (int i = 0; i < args.count; ++i) {
    const auto [lambda, B] = random_block(P.n, counter_hash(args.seed, static_cast<std::uint64_t>(i)));
    const InvarianceReport rep = verify_invariance(f, P, lambda, B, opt);
    for (const auto& row : rep.rows) {
      if (!worst.count(row.identity)) order.push_back(row.identity);
      Worst& w = worst[row.identity];
      w.printed = std::max(w.printed, row.printed_residual);
      if (!std::isnan(row.corrected_residual)) {
        w.has_corrected = true;
        w.corrected = std::max(w.corrected, row.corrected_residual);
      }
    }
    cases.push_back(to_json(rep));
  }
  int status = 0;
  Json summary = Json::array();
  for (const auto& id : order) {
    const Worst& w = worst[id];
    const double judged = (args.corrected && w.has_corrected) ? w.corrected : w.printed;
    const bool pass = judged < args.tolerance;
    if (!pass) status = 1;
    summary.push_back({{"identity", id},
                       {"max_printed_residual", w.printed},
                       {"max_corrected_residual", w.has_corrected ? Json(w.corrected) : Json(nullptr)},
                       {"pass", pass}});
  }
  Json doc;
  doc["tool"] = tool_json();
  doc["config"] = {{"command", "invariance"}, {"params", to_json(P)},        {"count", args.count},
                   {"seed", args.seed},       {"function", spec},            {"tolerance", args.tolerance},
                   {"corrected", args.corrected}, {"budget", budget_config(args.budget)}};
  doc["summary"] = summary;
  doc["cases"] = cases;
  out << doc.dump(2) << '\n';
  return status;
}

SelftestOutput run_selftest(const SelftestArgs& args) {
  SuiteConfig cfg;
  cfg.seed = args.seed;
  cfg.expensive = args.expensive;
  cfg.options = verify_options(args.budget, args.corrected_constants, std::nullopt);
  const SuiteReport suite = run_suite(cfg);

  Json config = {{"command", "selftest"},
                 {"seed", args.seed},
                 {"n", cfg.n_values},
                 {"p", cfg.p_values},
                 {"a", cfg.a_values},
                 {"expensive", args.expensive},
                 {"corrected_constants", args.corrected_constants},
                 {"budget", budget_config(args.budget)}};
  Json doc;
  doc["tool"] = tool_json();
  doc["config"] = config;
  doc["suite"] = to_json(suite);

  SelftestOutput o;
  o.json = doc.dump(2) + "\n";
  config["tool"] = tool_json();
  o.csv = "# " + config.dump() + "\n" + suite_csv(suite);
  o.failures = suite.failures;
  o.cases = suite.cases.size();
  o.status = suite.failures ? 1 : 0;
  return o;
}

}  // namespace affsob::cli
