#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "affsob/errors.hpp"
#include "affsob/version.hpp"
#include "commands.hpp"

namespace {

using affsob::Json;

// --config file.json: top-level keys are option names of the chosen
// subcommand ("level": 4, "p": [1.5, 2]); nested objects address subcommands.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const std::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return affsob::format_real(v.get<double>());
    return v.dump();
  }
  static void walk(const Json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConversionError("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        walk(*it, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      std::string name = it.key();
      for (char& c : name)
        if (c == '_') c = '-';
      item.name = name;
      if (it->is_array())
        for (const auto& v : *it) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(*it));
      items.push_back(std::move(item));
    }
  }
};

void add_budget(CLI::App* cmd, affsob::cli::Budget& b) {
  cmd->add_option("--scheme", b.scheme, "Half-space rule: polar, tensor_gauss, monte_carlo, map_to_cube");
  cmd->add_option("--level", b.level, "Quadrature refinement level");
  cmd->add_option("--sphere-resolution", b.sphere_resolution, "Direction rule resolution inside the half-space rule");
  cmd->add_option("--xi-resolution", b.xi_resolution, "Direction rule for the affine energy (0 = default)");
  cmd->add_option("--truncation-radius", b.truncation_radius, "Truncation radius (tensor and Monte Carlo rules)");
  cmd->add_option("--node-budget", b.node_budget, "Node budget (Monte Carlo rule)");
  cmd->add_option("--seed", b.seed, "Seed for every random choice")->capture_default_str();
}

int write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw affsob::ConfigError(path + ": cannot write");
  f << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = affsob::cli;
  CLI::App app{"Numerical verification of sharp affine weighted Sobolev, Gagliardo-Nirenberg and entropy inequalities"};
  app.set_version_flag("--version", std::string(affsob::kVersion));
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  std::string output;
  app.add_option("-o,--output", output, "Write the document to this file instead of stdout");

  cli::ConstantsArgs cargs;
  auto* constants = app.add_subcommand("constants", "Sharp constants in both computed forms");
  constants->add_option("--n", cargs.n)->capture_default_str();
  constants->add_option("--p", cargs.p)->capture_default_str();
  constants->add_option("--a", cargs.a)->capture_default_str();
  constants->add_option("--alpha", cargs.alpha);
  constants->add_flag("--limit-p1", cargs.limit_p1, "Limits p -> 1 of the affine constants");

  cli::VerifyArgs vargs;
  auto* verify = app.add_subcommand("verify", "Both sides of one inequality on one test function");
  verify->add_option("inequality", vargs.inequality,
                     "sobolev, corollary, gn, gn_a, gn_b, entropy, stronger, main_lemma, sobolev_p1, "
                     "nguyen_sobolev, nguyen_gn_a, nguyen_gn_b, nguyen_entropy")
      ->required();
  verify->add_option("--function", vargs.function_path, "Function spec (JSON)")->required();
  verify->add_option("--n", vargs.n);
  verify->add_option("--p", vargs.p);
  verify->add_option("--a", vargs.a);
  verify->add_option("--alpha", vargs.alpha);
  verify->add_option("--tolerance", vargs.tolerance, "Relative tolerance override");
  verify->add_flag("--corrected-constants", vargs.corrected_constants,
                   "Gagliardo-Nirenberg and entropy constants with the extremal correction");
  add_budget(verify, vargs.budget);

  cli::SweepArgs sargs;
  auto* sweep = app.add_subcommand("sweep", "One inequality over a parameter grid, CSV");
  sweep->add_option("inequality", sargs.inequality)->required();
  sweep->add_option("--function", sargs.function_path, "Function spec (JSON)")->required();
  sweep->add_option("--n", sargs.n_values)->capture_default_str();
  sweep->add_option("--p", sargs.p_values)->capture_default_str();
  sweep->add_option("--a", sargs.a_values)->capture_default_str();
  sweep->add_option("--alpha", sargs.alpha);
  sweep->add_flag("--corrected-constants", sargs.corrected_constants);
  add_budget(sweep, sargs.budget);

  cli::CentroidArgs bargs;
  auto* centroid = app.add_subcommand("centroid", "L_p centroid body volume ratios, CSV");
  centroid->add_option("--body", bargs.body_paths, "Body spec (JSON), repeatable");
  centroid->add_option("--p", bargs.p_values)->capture_default_str();
  centroid->add_option("--random", bargs.random_polygons, "Number of random symmetric polygons");
  centroid->add_option("--seed", bargs.seed)->capture_default_str();

  cli::InvarianceArgs iargs;
  auto* invariance = app.add_subcommand("invariance", "Transformation laws under random block matrices");
  invariance->add_option("--n", iargs.n)->capture_default_str();
  invariance->add_option("--p", iargs.p)->capture_default_str();
  invariance->add_option("--a", iargs.a)->capture_default_str();
  invariance->add_option("--count", iargs.count)->capture_default_str();
  invariance->add_option("--function", iargs.function_path, "Function spec (JSON); default sech_product");
  invariance->add_option("--tolerance", iargs.tolerance)->capture_default_str();
  invariance->add_flag("--corrected", iargs.corrected, "Judge rows by their corrected law where one exists");
  add_budget(invariance, iargs.budget);
  invariance->get_option("--seed")->default_val(iargs.budget.seed);

  cli::SelftestArgs targs;
  std::string json_path, csv_path;
  auto* selftest = app.add_subcommand("selftest", "Default verification grid; JSON and CSV artifacts");
  selftest->add_option("--json", json_path, "JSON output path (default stdout)");
  selftest->add_option("--csv", csv_path, "CSV output path");
  selftest->add_flag("--expensive", targs.expensive, "Include n = 4");
  selftest->add_flag("--corrected-constants", targs.corrected_constants);
  add_budget(selftest, targs.budget);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    std::ostringstream out;
    int status = 0;
    if (*constants) {
      status = cli::cmd_constants(cargs, out);
    } else if (*verify) {
      status = cli::cmd_verify(vargs, out);
    } else if (*sweep) {
      status = cli::cmd_sweep(sargs, out);
    } else if (*centroid) {
      status = cli::cmd_centroid(bargs, out);
    } else if (*invariance) {
      iargs.seed = iargs.budget.seed;
      status = cli::cmd_invariance(iargs, out);
    } else if (*selftest) {
      targs.seed = targs.budget.seed;
      const cli::SelftestOutput o = cli::run_selftest(targs);
      write_or_print(json_path.empty() ? output : json_path, o.json);
      if (!csv_path.empty()) write_or_print(csv_path, o.csv);
      std::cerr << "selftest: " << o.cases << " cases, " << o.failures << " failures\n";
      return o.status;
    }
    write_or_print(output, out.str());
    return status;
  } catch (const affsob::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const affsob::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
}
