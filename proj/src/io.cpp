#include "affsob/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "affsob/errors.hpp"
#include "affsob/version.hpp"

namespace affsob {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError((where.empty() ? std::string("/") : where) + ": " + what);
}

const Json* find(const Json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_real(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) bad(where, "expected a finite number");
  return x;
}

double real_or(const Json& j, const char* key, double fallback, const std::string& where) {
  const Json* v = find(j, key);
  return v ? get_real(*v, where + "/" + key) : fallback;
}

int get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd get_vector(const Json& j, const std::string& where, int len = -1) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  if (len >= 0 && static_cast<int>(j.size()) != len) bad(where, "expected " + std::to_string(len) + " entries");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_real(j[i], where + "/" + std::to_string(i));
  return v;
}

Eigen::MatrixXd get_matrix(const Json& j, const std::string& where, int rows = -1) {
  if (!j.is_array() || j.empty()) bad(where, "expected a non-empty array of rows");
  if (rows >= 0 && static_cast<int>(j.size()) != rows) bad(where, "expected " + std::to_string(rows) + " rows");
  const int r = static_cast<int>(j.size());
  const int c = j[0].is_array() ? static_cast<int>(j[0].size()) : -1;
  if (c <= 0) bad(where + "/0", "expected a non-empty row");
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) m.row(i) = get_vector(j[i], where + "/" + std::to_string(i), c).transpose();
  return m;
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

const char* scheme_name(HalfSpaceScheme s) {
  switch (s) {
    case HalfSpaceScheme::polar: return "polar";
    case HalfSpaceScheme::tensor_gauss: return "tensor_gauss";
    case HalfSpaceScheme::monte_carlo: return "monte_carlo";
    case HalfSpaceScheme::map_to_cube: return "map_to_cube";
  }
  return "?";
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Params params_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  Params params;
  if (const Json* v = find(j, "n")) params.n = get_int(*v, where + "/n");
  params.p = real_or(j, "p", params.p, where);
  params.a = real_or(j, "a", params.a, where);
  if (const Json* v = find(j, "alpha"); v && !v->is_null()) params.alpha = get_real(*v, where + "/alpha");
  if (params.n < 2) bad(where + "/n", "n must be at least 2");
  if (params.p < 1.0) bad(where + "/p", "p must be at least 1");
  if (params.a < 0.0) bad(where + "/a", "a must be non-negative");
  return params;
}

Frame frame_from_json(const Json& j, int n, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  Frame fr;
  fr.lambda = real_or(j, "lambda", 1.0, where);
  if (!(fr.lambda > 0.0)) bad(where + "/lambda", "lambda must be positive");
  if (const Json* v = find(j, "B")) {
    fr.B = get_matrix(*v, where + "/B", n - 1);
    if (fr.B.cols() != n - 1) bad(where + "/B", "expected a square matrix of size n-1");
    if (std::abs(fr.B.determinant()) < 1e-12) bad(where + "/B", "matrix is singular");
  }
  if (const Json* v = find(j, "x0")) fr.x0 = get_vector(*v, where + "/x0", n - 1);
  return fr;
}

ConjugatePair conjugate_pair_from_json(const Json& j, int n, double q, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  const std::string type = find(j, "type") ? get_string(j["type"], where + "/type") : "norm_power";
  if (type != "norm_power") bad(where + "/type", "unknown type '" + type + "' (expected norm_power)");
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  if (const Json* v = find(j, "B")) {
    B = get_matrix(*v, where + "/B", n);
    if (B.cols() != n) bad(where + "/B", "expected an n x n matrix");
    if (std::abs(B.determinant()) < 1e-12) bad(where + "/B", "matrix is singular");
  }
  const double r = real_or(j, "r", 2.0, where);
  if (r < 1.0) bad(where + "/r", "r must be at least 1");
  return norm_power_pair(B, q, r);
}

TestFunction function_from_json(const Json& j, const Params& params) {
  if (!j.is_object()) bad("", "expected an object");
  const Json* fam = find(j, "family");
  if (!fam) bad("/family", "missing");
  const std::string family = get_string(*fam, "/family");
  const double c = real_or(j, "c", 1.0, "");
  Frame frame;
  if (const Json* v = find(j, "frame")) frame = frame_from_json(*v, params.n);
  const int n = params.n;
  if (family == "sobolev_extremal") return sobolev_extremal(params, c, frame);
  if (family == "gn_extremal" || family == "gn_a_extremal" || family == "gn_b_extremal") {
    if (!params.alpha) bad("/alpha", "required for " + family);
    return gn_extremal(params, c, frame);
  }
  if (family == "entropy_extremal") return entropy_extremal(params, c, frame);
  if (family == "gaussian") return gaussian(n, c, frame);
  if (family == "sech_product") return sech_product(n, c, frame);
  if (family == "indicator_smoothed") {
    const double eps = real_or(j, "eps", 0.05, "");
    if (!(eps > 0.0 && eps < 0.5)) bad("/eps", "eps must lie in (0, 0.5)");
    IndicatorShape shape = IndicatorShape::cylinder;
    if (const Json* v = find(j, "shape")) {
      const std::string s = get_string(*v, "/shape");
      if (s == "ball")
        shape = IndicatorShape::ball;
      else if (s != "cylinder")
        bad("/shape", "expected cylinder or ball");
    }
    return indicator_smoothed(n, eps, shape, c, frame);
  }
  if (family == "nguyen_h_pa" || family == "nguyen_h_alpha" || family == "nguyen_entropy") {
    if (params.p <= 1.0) bad("/p", "p must exceed 1 for " + family);
    const Json* cj = find(j, "C");
    const ConjugatePair pair = cj ? conjugate_pair_from_json(*cj, n, params.q()) : norm_power_pair(Eigen::MatrixXd::Identity(n, n), params.q());
    if (family == "nguyen_h_pa") return nguyen_h_pa(pair.C, params, c, frame);
    if (family == "nguyen_entropy") return nguyen_entropy(pair.C, params, c, frame);
    if (!params.alpha) bad("/alpha", "required for " + family);
    return nguyen_h_alpha(pair.C, params, c, frame);
  }
  bad("/family", "unknown family '" + family + "'");
}

ConvexBody body_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  const Json* t = find(j, "type");
  if (!t) bad(where + "/type", "missing");
  const std::string type = get_string(*t, where + "/type");
  if (type == "ellipsoid") {
    const Json* m = find(j, "matrix");
    const std::string loc = where + "/matrix";
    if (!m) bad(loc, "missing");
    Eigen::MatrixXd B = get_matrix(*m, loc);
    if (B.rows() != B.cols()) bad(loc, "expected a square matrix");
    if (std::abs(B.determinant()) < 1e-14) bad(loc, "matrix is singular");
    return ConvexBody(Ellipsoid{B});
  }
  if (type == "polygon") {
    const Json* v = find(j, "vertices");
    const std::string loc = where + "/vertices";
    if (!v) bad(loc, "missing");
    const Eigen::MatrixXd m = get_matrix(*v, loc);
    if (m.cols() != 2 || m.rows() < 3) bad(loc, "expected at least three [x, y] pairs");
    Eigen::Matrix2Xd verts = m.transpose();
    // orientation and origin containment
    const int k = static_cast<int>(verts.cols());
    double area = 0.0;
    for (int i = 0; i < k; ++i) {
      const Eigen::Vector2d a = verts.col(i), b = verts.col((i + 1) % k);
      area += a.x() * b.y() - a.y() * b.x();
    }
    if (area < 0.0) verts = verts.rowwise().reverse().eval();
    for (int i = 0; i < k; ++i) {
      const Eigen::Vector2d a = verts.col(i), b = verts.col((i + 1) % k), c = verts.col((i + 2) % k);
      if (a.x() * b.y() - a.y() * b.x() <= 0.0) bad(loc, "origin must lie in the interior");
      if ((b - a).x() * (c - b).y() - (b - a).y() * (c - b).x() < 0.0) bad(loc, "polygon is not convex");
    }
    return ConvexBody(Polygon{verts});
  }
  if (type == "lq_ball") {
    LqBall ball;
    if (const Json* v = find(j, "dim")) ball.dim = get_int(*v, where + "/dim");
    if (const Json* v = find(j, "q"); v && v->is_string() && v->get<std::string>() == "inf")
      ball.q = std::numeric_limits<double>::infinity();
    else
      ball.q = real_or(j, "q", 2.0, where);
    ball.scale = real_or(j, "scale", 1.0, where);
    if (ball.dim < 1 || ball.dim > 3) bad(where + "/dim", "dim must be 1, 2 or 3");
    if (!(ball.q >= 1.0)) bad(where + "/q", "q must be at least 1");
    if (!(ball.scale > 0.0)) bad(where + "/scale", "scale must be positive");
    return ConvexBody(ball);
  }
  bad(where + "/type", "unknown body type '" + type + "'");
}

// ---------------------------------------------------------------------------

Json to_json(const Params& params) {
  Json j;
  j["n"] = params.n;
  j["p"] = params.p;
  j["a"] = params.a;
  j["alpha"] = params.alpha ? Json(*params.alpha) : Json(nullptr);
  return j;
}

Json to_json(const ConstantValue& v) {
  Json j;
  j["name"] = std::string(to_string(v.name));
  j["params"] = to_json(v.params);
  j["defining"] = v.defining;
  j["simplified"] = v.simplified;
  j["rel_gap"] = v.rel_gap;
  j["flagged"] = v.flagged;
  j["is_limit"] = v.is_limit;
  j["extremal_correction"] = extremal_correction(v.name, v.params);
  j["notes"] = v.notes;
  return j;
}

Json to_json(const DeficitReport& r) {
  Json j;
  j["inequality"] = r.inequality;
  j["params"] = to_json(r.params);
  j["function"] = r.function;
  j["digest"] = r.digest;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["ratio"] = r.ratio;
  j["ratio_printed"] = r.ratio_printed;
  j["ratio_corrected"] = r.ratio_corrected;
  j["deficit"] = r.deficit;
  j["err_estimate"] = r.err_estimate;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  Json extras = Json::array();
  for (const auto& e : r.extras)
    extras.push_back({{"name", e.name}, {"value", e.value}, {"tolerance", e.tolerance}, {"pass", e.pass}});
  j["extras"] = extras;
  j["notes"] = r.notes;
  return j;
}

Json to_json(const InvarianceReport& r) {
  Json j;
  j["params"] = to_json(r.params);
  j["function"] = r.function;
  j["lambda"] = r.lambda;
  j["B"] = mat_json(r.B);
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"identity", row.identity},
                    {"printed_residual", row.printed_residual},
                    {"corrected_residual", std::isnan(row.corrected_residual) ? Json(nullptr) : Json(row.corrected_residual)}});
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const BpResult& r) {
  return {{"vol_K", r.vol_K}, {"vol_GpK", r.vol_GpK}, {"ratio", r.ratio}, {"pass", r.pass}};
}

Json budget_json(const FunctionalOptions& o) {
  Json j;
  j["version"] = kVersion;
  j["scheme"] = scheme_name(o.rule.scheme);
  j["level"] = o.rule.level;
  j["sphere_resolution"] = o.rule.sphere_resolution;
  j["truncation_radius"] = o.rule.truncation_radius;
  j["node_budget"] = o.rule.node_budget;
  j["seed"] = o.rule.seed;
  j["xi_resolution"] = o.xi_resolution;
  return j;
}

Json to_json(const SuiteReport& suite) {
  Json j;
  j["failures"] = suite.failures;
  Json cases = Json::array();
  for (const auto& [key, rep] : suite.cases) {
    Json c = to_json(rep);
    c["key"] = key;
    cases.push_back(std::move(c));
  }
  j["cases"] = cases;
  return j;
}

std::string suite_csv(const SuiteReport& suite) {
  std::ostringstream os;
  os << "key,inequality,n,p,a,alpha,digest,lhs,rhs,ratio,ratio_printed,ratio_corrected,deficit,err_estimate,tolerance,pass\n";
  for (const auto& [key, r] : suite.cases) {
    os << '"' << key << "\"," << r.inequality << ',' << r.params.n << ',' << format_real(r.params.p) << ','
       << format_real(r.params.a) << ',' << (r.params.alpha ? format_real(*r.params.alpha) : "") << ',' << r.digest
       << ',' << format_real(r.lhs) << ',' << format_real(r.rhs) << ',' << format_real(r.ratio) << ','
       << format_real(r.ratio_printed) << ',' << format_real(r.ratio_corrected) << ',' << format_real(r.deficit)
       << ',' << format_real(r.err_estimate) << ',' << format_real(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace affsob
