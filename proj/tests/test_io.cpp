#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "affsob/errors.hpp"
#include "affsob/io.hpp"
#include "doctest.h"

using namespace affsob;

namespace {

std::string config_error(const Json& spec, const Params& P) {
  try {
    function_from_json(spec, P);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("function specs") {
  const Json spec = Json::parse(R"({"family": "sobolev_extremal", "n": 3, "p": 1.5, "a": 1, "c": 2,
      "frame": {"lambda": 1.3, "B": [[1, 0.2], [0, 0.8]], "x0": [0.1, 0]}})");
  const Params P = params_from_json(spec);
  CHECK(P.n == 3);
  CHECK(P.p == 1.5);
  CHECK(P.a == 1.0);
  CHECK_FALSE(P.alpha.has_value());
  Frame fr;
  fr.lambda = 1.3;
  fr.B.resize(2, 2);
  fr.B << 1, 0.2, 0, 0.8;
  fr.x0.resize(2);
  fr.x0 << 0.1, 0;
  CHECK(function_from_json(spec, P).digest() == sobolev_extremal(P, 2.0, fr).digest());

  for (const char* fam : {"gaussian", "sech_product", "entropy_extremal", "nguyen_h_pa", "nguyen_entropy"}) {
    CAPTURE(fam);
    CHECK(function_from_json(Json{{"family", fam}}, P).n() == 3);
  }
  Params Pa = P;
  Pa.alpha = 1.2;
  CHECK(function_from_json(Json{{"family", "gn_extremal"}}, Pa).profile->family == "gn_a_extremal");
  CHECK(function_from_json(Json::parse(R"({"family": "nguyen_h_alpha", "C": {"B": [[1,0,0],[0,2,0],[0,0,1]], "r": 4}})"), Pa).n() == 3);
  CHECK(function_from_json(Json::parse(R"({"family": "indicator_smoothed", "eps": 0.02, "shape": "ball"})"), P).profile->params.find("ball") != std::string::npos);
}

TEST_CASE("configuration errors name their location") {
  const Params P{3, 2.0, 0.0, std::nullopt};
  CHECK(config_error(Json::parse(R"({"family": "nope"})"), P).find("/family") == 0);
  CHECK(config_error(Json::parse(R"({})"), P).find("/family") == 0);
  CHECK(config_error(Json::parse(R"({"family": "gaussian", "frame": {"B": [[1, "x"], [0, 1]]}})"), P).find("/frame/B/0/1") == 0);
  CHECK(config_error(Json::parse(R"({"family": "gaussian", "frame": {"B": [[1, 0]]}})"), P).find("/frame/B") == 0);
  CHECK(config_error(Json::parse(R"({"family": "gaussian", "frame": {"lambda": -1}})"), P).find("/frame/lambda") == 0);
  CHECK(config_error(Json::parse(R"({"family": "gaussian", "frame": {"x0": [1]}})"), P).find("/frame/x0") == 0);
  CHECK(config_error(Json::parse(R"({"family": "gn_extremal"})"), P).find("/alpha") == 0);
  CHECK(config_error(Json::parse(R"({"family": "indicator_smoothed", "shape": "cone"})"), P).find("/shape") == 0);
  CHECK(config_error(Json::parse(R"({"family": "nguyen_h_pa", "C": {"type": "other"}})"), P).find("/C/type") == 0);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"n": 1})")), ConfigError);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"n": 2.5})")), ConfigError);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"p": "two"})")), ConfigError);
  CHECK_THROWS_AS(read_json_file("/nonexistent/spec.json"), ConfigError);
}

TEST_CASE("body specs") {
  const ConvexBody sq = body_from_json(Json::parse(R"({"type": "polygon", "vertices": [[1,1],[-1,1],[-1,-1],[1,-1]]})"));
  CHECK(volume(sq) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(bp_check(sq, 2.0).ratio == doctest::Approx(std::numbers::pi / 3).epsilon(1e-10));
  // clockwise input is accepted
  const ConvexBody cw = body_from_json(Json::parse(R"({"type": "polygon", "vertices": [[1,-1],[-1,-1],[-1,1],[1,1]]})"));
  CHECK(volume(cw) == doctest::Approx(4.0).epsilon(1e-14));
  const ConvexBody el = body_from_json(Json::parse(R"({"type": "ellipsoid", "matrix": [[2, 0], [0, 0.5]]})"));
  CHECK(volume(el) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  const ConvexBody l4 = body_from_json(Json::parse(R"({"type": "lq_ball", "q": 4, "scale": 2})"));
  CHECK(l4.dim() == 2);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "polygon", "vertices": [[1,1],[2,2],[3,1]]})")), ConfigError);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "polygon", "vertices": [[1,0],[0,1],[0.1,0.1],[-1,0],[0,-1]]})")), ConfigError);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "ellipsoid", "matrix": [[1, 2], [2, 4]]})")), ConfigError);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "blob"})")), ConfigError);
}

TEST_CASE("17-digit output round-trips") {
  for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, -2.5e17, 0.9999999999999999})
    CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);

  SuiteReport suite;
  DeficitReport r;
  r.inequality = "sobolev";
  r.params = Params{3, 1.5, 1.0, 0.3};
  r.lhs = 1.0 / 3.0;
  r.rhs = std::numbers::e;
  r.ratio = r.rhs / r.lhs;
  r.pass = true;
  suite.cases.emplace_back("n=3,p=1.5,a=1|sobolev|x", r);
  const std::string csv = suite_csv(suite);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream rs(row.substr(row.find("\",") + 2));
  while (std::getline(rs, cell, ',')) cells.push_back(cell);
  // inequality,n,p,a,alpha,digest,lhs,rhs,ratio,...
  CHECK(std::strtod(cells[6].c_str(), nullptr) == r.lhs);
  CHECK(std::strtod(cells[7].c_str(), nullptr) == r.rhs);
  CHECK(std::strtod(cells[8].c_str(), nullptr) == r.ratio);
  CHECK(std::strtod(cells[4].c_str(), nullptr) == 0.3);

  const Json j = to_json(r);
  for (const char* k : {"inequality", "params", "lhs", "rhs", "ratio", "ratio_printed", "ratio_corrected", "deficit",
                        "err_estimate", "tolerance", "pass", "extras", "notes"})
    CHECK(j.contains(k));
  const Json b = budget_json(FunctionalOptions{});
  for (const char* k : {"version", "scheme", "level", "sphere_resolution", "truncation_radius", "node_budget", "seed"})
    CHECK(b.contains(k));
}
