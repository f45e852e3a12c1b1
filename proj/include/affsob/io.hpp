#pragma once

// JSON and CSV forms of specifications and reports.
//
// Function spec:
//   {"family": "sobolev_extremal", "n": 3, "p": 2, "a": 0, "alpha": 2, "c": 1,
//    "frame": {"lambda": 1.2, "B": [[1, 0], [0.3, 1]], "x0": [0, 0.1]},
//    "eps": 0.05, "shape": "cylinder",             (indicator_smoothed)
//    "C": {"type": "norm_power", "B": [[...]], "r": 2}}  (nguyen_* families)
// Body spec:
//   {"type": "ellipsoid", "matrix": [[...]]} | {"type": "polygon", "vertices": [[x, y], ...]}
//   | {"type": "lq_ball", "dim": 2, "q": 4, "scale": 1}

#include <json.hpp>
#include <string>

#include "affsob/convex_geometry.hpp"
#include "affsob/functionals.hpp"
#include "affsob/sharp_constants.hpp"
#include "affsob/verifier.hpp"

namespace affsob {

using Json = nlohmann::ordered_json;

// All parsers throw ConfigError naming the offending JSON location.
Params params_from_json(const Json& j, const std::string& where = "");
Frame frame_from_json(const Json& j, int n, const std::string& where = "/frame");
ConjugatePair conjugate_pair_from_json(const Json& j, int n, double q, const std::string& where = "/C");
/// Builds the family named in j; exponents come from `params` (already merged with any overrides).
TestFunction function_from_json(const Json& j, const Params& params);
ConvexBody body_from_json(const Json& j, const std::string& where = "");

Json to_json(const Params& params);
Json to_json(const ConstantValue& value);
Json to_json(const DeficitReport& report);
Json to_json(const InvarianceReport& report);
Json to_json(const BpResult& result);
Json budget_json(const FunctionalOptions& options);
Json to_json(const SuiteReport& suite);

/// One row per case; every real printed with 17 significant digits.
std::string suite_csv(const SuiteReport& suite);

/// "%.17g"
std::string format_real(double x);

Json read_json_file(const std::string& path);

}  // namespace affsob
