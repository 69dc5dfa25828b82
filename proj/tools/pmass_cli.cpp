// pmass: run the mass pipeline on a configuration file.

#include "pmass/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>
#include <sstream>
#include <string>

namespace {

// Restricts the run to the named stages plus the ones they depend on.
void apply_stage_filter(pmass::RunConfig& c, const std::string& list) {
  static const std::set<std::string> known{"validate", "green", "levelsets", "audit", "mass", "yamabe"};
  std::set<std::string> want;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    item = pmass::detail::trim(item);
    if (item.empty()) continue;
    if (!known.count(item)) throw pmass::ConfigError("--stage: unknown stage '" + item + "'");
    want.insert(item);
  }
  if (want.count("levelsets") || want.count("audit")) want.insert("green");
  if (!want.empty()) want.insert("validate");
  c.stage_validate = want.count("validate") > 0;
  c.stage_green = want.count("green") > 0;
  c.stage_levelsets = want.count("levelsets") > 0;
  c.stage_audit = want.count("audit") > 0;
  c.stage_mass = want.count("mass") > 0;
  c.stage_yamabe = want.count("yamabe") > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green-function level-set mass pipeline for asymptotically hyperbolic 3-manifolds"};
  std::string config_path, stages, out_dir;
  bool strict = false, dump = false, quiet = false;
  app.add_option("config", config_path, "configuration file (INI)")->required();
  app.add_option("--stage", stages, "comma-separated stages: validate,green,levelsets,audit,mass,yamabe");
  app.add_option("--out", out_dir, "output directory (overrides [output] out_dir)");
  app.add_flag("--strict", strict, "refuse metrics with decay rate delta <= 1 (exit 2)");
  app.add_flag("--dump-fields", dump, "write the axisymmetric grid field to field.txt");
  app.add_flag("-q,--quiet", quiet, "do not print the summary");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  try {
    pmass::RunConfig c = pmass::parse_config(config_path);
    if (!stages.empty()) apply_stage_filter(c, stages);
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (strict) c.strict = true;
    if (dump) c.dump_fields = true;
    const pmass::RunReport rep = pmass::run_pipeline(c);
    pmass::emit_report(rep, c.out_dir);
    if (!quiet) std::cout << pmass::summary_text(rep);
    return rep.exit_code();
  } catch (const pmass::ConfigError& e) {
    std::cerr << "pmass: " << e.what() << "\n";
    return 4;
  } catch (const pmass::HypothesisGateError& e) {
    std::cerr << "pmass: " << e.what() << "\n";
    return 2;
  } catch (const pmass::ConvergenceError& e) {
    std::cerr << "pmass: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pmass: " << e.what() << "\n";
    return 1;
  }
}
