#pragma once

// Subcommands of the affsob tool. Each returns an exit status
// (0 pass, 1 verification failure, 2 usage or configuration error) and writes
// its document to `out`. Config problems are thrown as ConfigError / DomainError
// and mapped to status 2 by the caller.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "affsob/io.hpp"
#include "affsob/verifier.hpp"

namespace affsob::cli {

inline constexpr std::uint64_t kDefaultSeed = 0x5EEDULL;

struct Budget {
  std::string scheme = "polar";
  int level = 3;
  int sphere_resolution = 16;
  int xi_resolution = 0;
  double truncation_radius = 40.0;
  std::int64_t node_budget = 200000;
  std::uint64_t seed = kDefaultSeed;
};
FunctionalOptions functional_options(const Budget& b);

struct ConstantsArgs {
  int n = 3;
  double p = 2.0;
  double a = 0.0;
  std::optional<double> alpha;
  bool limit_p1 = false;
};
int cmd_constants(const ConstantsArgs& args, std::ostream& out);

struct VerifyArgs {
  std::string inequality;  // sobolev corollary gn entropy stronger main_lemma sobolev_p1 nguyen_{sobolev,gn_a,gn_b,entropy}
  std::string function_path;
  std::optional<int> n;
  std::optional<double> p, a, alpha;
  std::optional<double> tolerance;
  bool corrected_constants = false;
  Budget budget;
};
DeficitReport run_verify(const std::string& inequality, const Json& spec, const Params& params, const VerifyOptions& opt);
int cmd_verify(const VerifyArgs& args, std::ostream& out);

struct SweepArgs {
  std::string inequality = "sobolev";
  std::string function_path;
  std::vector<int> n_values = {2, 3};
  std::vector<double> p_values = {1.5, 2.0, 3.0};
  std::vector<double> a_values = {0.0, 1.0};
  std::optional<double> alpha;
  bool corrected_constants = false;
  Budget budget;
};
int cmd_sweep(const SweepArgs& args, std::ostream& out);

struct CentroidArgs {
  std::vector<std::string> body_paths;
  std::vector<double> p_values = {2.0};
  int random_polygons = 0;
  std::uint64_t seed = kDefaultSeed;
};
int cmd_centroid(const CentroidArgs& args, std::ostream& out);

struct InvarianceArgs {
  int n = 3;
  double p = 2.0;
  double a = 0.0;
  int count = 20;
  std::uint64_t seed = kDefaultSeed;
  std::string function_path;  // default: sech_product
  double tolerance = 1e-4;
  bool corrected = false;  // judge rows by their corrected law where one exists
  Budget budget;
};
int cmd_invariance(const InvarianceArgs& args, std::ostream& out);

struct SelftestArgs {
  std::uint64_t seed = kDefaultSeed;
  bool expensive = false;
  bool corrected_constants = false;
  Budget budget;
};
struct SelftestOutput {
  int status = 0;
  std::string json;
  std::string csv;
  int failures = 0;
  std::size_t cases = 0;
};
SelftestOutput run_selftest(const SelftestArgs& args);

}  // namespace affsob::cli
