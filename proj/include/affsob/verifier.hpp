#pragma once

// Both sides of every inequality and identity, evaluated on test functions.
// Sign convention: deficit = rhs - lhs >= 0 for a passing inequality.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affsob/functionals.hpp"
#include "affsob/sharp_constants.hpp"

namespace affsob {

struct Residual {
  std::string name;
  double value = 0.0;  // relative residual unless noted
  double tolerance = 0.0;
  bool pass = false;
};

struct DeficitReport {
  std::string inequality;
  Params params;
  std::string function;  // TestFunction::describe()
  std::string digest;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // rhs / lhs (entropy: exp(p deficit / (n+a)))
  // the same ratio with the constant as printed and with extremal_correction applied
  double ratio_printed = 0.0;
  double ratio_corrected = 0.0;
  double deficit = 0.0;
  double err_estimate = 0.0;
  double tolerance = 0.0;  // absolute slack allowed in the pass test
  bool pass = false;
  std::vector<Residual> extras;
  std::string notes;
};

struct VerifyOptions {
  FunctionalOptions functional;
  std::optional<double> rel_tolerance;  // overrides the per-inequality default
  /// Use the GN / entropy constants multiplied by extremal_correction.
  bool corrected_constants = false;
  /// Fault injection: multiply the named constant before use.
  std::map<ConstantName, double> constant_scale;
};

/// Default relative tolerances: 5e-3 (Sobolev, corollary), 1e-2 (GN, entropy,
/// main lemma, Nguyen), 1e-8 (stronger).
double default_tolerance(const std::string& inequality);

DeficitReport verify_sobolev(const TestFunction& f, const Params& params, const VerifyOptions& opt = {});
DeficitReport verify_corollary(const TestFunction& f, const Params& params, const VerifyOptions& opt = {});
DeficitReport verify_gn(const TestFunction& f, const Params& params, GnCase which, const VerifyOptions& opt = {});
/// f is normalized in L^p_w before evaluation.
DeficitReport verify_entropy(const TestFunction& f, const Params& params, const VerifyOptions& opt = {});
DeficitReport verify_stronger(const TestFunction& f, const Params& params, const VerifyOptions& opt = {});
DeficitReport verify_main_lemma(const TestFunction& f, const Params& params, const VerifyOptions& opt = {});

enum class NguyenKind { sobolev, gn_a, gn_b, entropy };
/// Norm-dependent inequality for the pair (C, C*); C of degree q on R^n.
DeficitReport verify_nguyen(const TestFunction& f, const HomogeneousConvexFn& C, const HomogeneousConvexFn& Cstar,
                            const Params& params, NguyenKind which, const VerifyOptions& opt = {});

/// p = 1 Sobolev via smoothed indicators at each width, then quadratic
/// extrapolation of the ratio to eps = 0. lhs/rhs belong to the smallest width.
DeficitReport verify_sobolev_p1(int n, double a, IndicatorShape shape, const Frame& frame = {},
                                const std::vector<double>& widths = {0.1, 0.05, 0.025}, const VerifyOptions& opt = {});

/// Transformation laws under f -> f(lambda t, B x): each identity as printed and,
/// where it differs, in corrected form. Residuals are relative.
struct InvarianceRow {
  std::string identity;
  double printed_residual = 0.0;
  double corrected_residual = 0.0;  // NaN when no corrected form applies
};
struct InvarianceReport {
  Params params;
  std::string function;
  double lambda = 1.0;
  Eigen::MatrixXd B;
  std::vector<InvarianceRow> rows;
};
InvarianceReport verify_invariance(const TestFunction& f, const Params& params, double lambda, const Eigen::MatrixXd& B,
                                   const VerifyOptions& opt = {});

// ---------------------------------------------------------------------------

struct SuiteConfig {
  std::vector<int> n_values = {2, 3};
  std::vector<double> p_values = {1.5, 2.0, 3.0};
  std::vector<double> a_values = {0.0, 1.0};
  bool expensive = false;  // adds n = 4
  std::uint64_t seed = 0x5EEDULL;
  VerifyOptions options;
};

struct SuiteReport {
  std::vector<std::pair<std::string, DeficitReport>> cases;  // sorted by key
  int failures = 0;
};

/// The default grid with the function battery. Failures are collected, not thrown.
SuiteReport run_suite(const SuiteConfig& config);

/// Random frame (lambda, B, x0) for n from a counter stream; det B > 0.
Frame random_frame(int n, std::uint64_t seed);
/// Random block matrix diag(lambda, B) with lambda in [0.5, 2], well conditioned B.
std::pair<double, Eigen::MatrixXd> random_block(int n, std::uint64_t seed);

}  // namespace affsob
