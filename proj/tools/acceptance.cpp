// pmass_acceptance: one PASS/FAIL line per acceptance criterion.
// Usage: pmass_acceptance <examples_cfg dir>

#include "pmass/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace pmass;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

class Runs {
 public:
  explicit Runs(fs::path dir) : dir_(std::move(dir)) {}

  RunConfig config(const std::string& name) const { return parse_config((dir_ / name).string()); }

  const RunReport& report(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end()) it = cache_.emplace(name, run_pipeline(config(name))).first;
    return it->second;
  }

 private:
  fs::path dir_;
  std::map<std::string, RunReport> cache_;
};

const ReportCheck* find_check(const RunReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.line.name == name) return &c;
  return nullptr;
}

// A named check must be present and pass in the given run.
void require_check(Outcome& o, Runs& runs, const std::string& cfg, const std::string& name) {
  const ReportCheck* c = find_check(runs.report(cfg), name);
  if (!c) {
    o.require(false, cfg + ": " + name + " missing");
    return;
  }
  o.require(c->line.pass, cfg + ": " + name + " " + num(c->line.value) + " vs " + num(c->line.bound));
}

const std::vector<std::string> radial_valid{"mass_bump_small.ini", "mass_bump_unit.ini"};
const std::vector<std::string> all_valid{"hyperbolic.ini", "mass_bump_small.ini", "mass_bump_unit.ini",
                                         "axisym_mode2.ini", "axisym_zero.ini"};

Outcome hyperbolic_rigidity(Runs&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const GreenProfile g(make_hyperbolic());
  double worst = 0.0;
  for (double t : geometric_grid(0.05, 5.0, 40)) worst = std::max(worst, std::abs(evaluate_F(g, t).F));
  const double s = seconds_since(t0);
  o.require(worst <= 1e-8, "max |F| " + num(worst));
  o.require(s <= 1.0, "runtime " + num(s) + " s");
  return o;
}

Outcome flux_law(Runs& runs) {
  Outcome o;
  for (const char* cfg : {"hyperbolic.ini", "mass_bump_small.ini", "mass_bump_unit.ini"})
    require_check(o, runs, cfg, "flux_law");
  const ReportCheck* c = find_check(runs.report("axisym_mode2.ini"), "flux_law_over_grid_estimate");
  o.require(c && c->counted && c->line.pass,
            "axisym flux/estimate " + (c ? num(c->line.value) : std::string("missing")));
  const RunConfig cfg = runs.config("axisym_mode2.ini");
  const auto t0 = std::chrono::steady_clock::now();
  const AxisymMetric m = build_axisym_perturbation(cfg.axisym_amplitude, cfg.r_in, cfg.r_out,
                                                   static_cast<unsigned>(cfg.angular_mode),
                                                   build_mass_bump(cfg.mass, cfg.phi_in, cfg.phi_out));
  (void)solve_green_axisym(m, GridSpec{cfg.grid_r_min, cfg.grid_r_max, 256, 64, Stretching::uniform});
  const double s = seconds_since(t0);
  o.require(s <= 30.0, "256x64 solve " + num(s) + " s");
  return o;
}

Outcome pole(Runs& runs) {
  Outcome o;
  for (const char* cfg : {"hyperbolic.ini", "mass_bump_small.ini", "mass_bump_unit.ini"})
    require_check(o, runs, cfg, "pole_asymptotics");
  // 4 pi r G = r (1 - u) on the grid field
  for (const char* cfg : {"axisym_mode2.ini", "axisym_zero.ini"}) {
    const auto& field = runs.report(cfg).field;
    if (!field) {
      o.require(false, std::string(cfg) + ": no field");
      continue;
    }
    double lo = infinity, hi = -infinity;
    for (double th : {0.1, pi / 2.0, 3.0}) {
      const double v = 1e-3 * (1.0 - field->jet(1e-3, th).u);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    o.require(lo >= 0.998 && hi <= 1.0, std::string(cfg) + ": [" + num(lo) + ", " + num(hi) + "]");
  }
  return o;
}

Outcome infinity_fit(Runs&) {
  Outcome o;
  const ExpansionFit f = fit_infinity_expansion(GreenProfile(make_hyperbolic()), 6.0, 10.0);
  const double rel = std::abs(f.v2 * two_pi - 1.0);
  o.require(rel <= 1e-6, "v2 relative error " + num(rel));
  o.require(std::abs(f.v3) <= 1e-6 * f.v2, "|v3|/v2 " + num(std::abs(f.v3) / f.v2));
  return o;
}

Outcome monotonicity(Runs& runs) {
  Outcome o;
  for (const char* cfg : {"mass_bump_small.ini", "mass_bump_unit.ini", "axisym_mode2.ini"})
    require_check(o, runs, cfg, "monotone");
  return o;
}

Outcome decomposition(Runs& runs) {
  Outcome o;
  for (const auto& cfg : all_valid) require_check(o, runs, cfg, "decomposition_nonnegative");
  for (const auto& cfg : radial_valid) require_check(o, runs, cfg, "fprime_consistency");
  return o;
}

Outcome mass_and_limit(Runs& runs) {
  Outcome o;
  for (const auto& cfg : all_valid) {
    require_check(o, runs, cfg, "mass_sign");
    require_check(o, runs, cfg, "limit");
  }
  require_check(o, runs, "hyperbolic.ini", "hyperbolic_mass_zero");
  return o;
}

Outcome q2_consistency(Runs& runs) {
  Outcome o;
  for (const auto& cfg : radial_valid) {
    if (runs.config(cfg).q2_t != 6.0) o.require(false, cfg + ": q2_t is not 6");
    require_check(o, runs, cfg, "Q2_limit");
  }
  return o;
}

Outcome willmore_isoperimetric(Runs& runs) {
  Outcome o;
  for (const auto& cfg : all_valid) {
    require_check(o, runs, cfg, "willmore_reference");
    require_check(o, runs, cfg, "isoperimetric_reference");
  }
  return o;
}

Outcome yamabe(Runs& runs) {
  Outcome o;
  const std::string cfg = "mass_bump_small.ini";
  for (const char* name : {"yamabe_residual", "yamabe_scalar_constant", "yamabe_uniqueness"})
    require_check(o, runs, cfg, name);
  const RunConfig c = runs.config(cfg);
  const RadialMetric m = build_mass_bump(c.mass, c.phi_in, c.phi_out);
  const auto t0 = std::chrono::steady_clock::now();
  const ConformalFactorProfile p = solve_yamabe_radial(m);
  YamabeConfig alt;
  alt.initial = [](double r) { return 1.0 + 0.05 * std::exp(-(r - 1.0) * (r - 1.0)); };
  (void)solve_yamabe_radial(m, alt);
  (void)validate_metric(conformal_metric(m, p), 1e-6);
  const double s = seconds_since(t0);
  o.require(s <= 10.0, "runtime " + num(s) + " s");
  return o;
}

Outcome dual_pipeline(Runs& runs) {
  Outcome o;
  require_check(o, runs, "axisym_zero.ini", "zero_amplitude_equivalence");
  const RunConfig c = runs.config("axisym_mode2.ini");
  const AxisymMetric m = build_axisym_perturbation(c.axisym_amplitude, c.r_in, c.r_out,
                                                   static_cast<unsigned>(c.angular_mode),
                                                   build_mass_bump(c.mass, c.phi_in, c.phi_out));
  std::vector<double> f;
  for (int n : {128, 256, 512}) {
    const FieldContext ctx(solve_green_axisym(m, GridSpec{c.grid_r_min, c.grid_r_max, n, n / 4, Stretching::uniform}));
    f.push_back(evaluate_F(ctx, 1.0).F);
  }
  const double p = observed_order(f[0], f[1], f[2]);
  o.require(p >= 1.7 && p <= 2.3, "observed order of F(1) " + num(p));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(Runs& runs) {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "pmass_acceptance_determinism";
  for (const char* cfg : {"mass_bump_small.ini", "axisym_mode2.ini"}) {
    fs::remove_all(root);
    const RunConfig c = runs.config(cfg);
    emit_report(run_pipeline(c), (root / "a").string());
    emit_report(run_pipeline(c), (root / "b").string());
    int files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(root / "a")) {
      ++files;
      same += slurp(e.path()) == slurp(root / "b" / e.path().filename());
    }
    o.require(files > 0 && same == files, std::string(cfg) + ": " + std::to_string(same) + "/" +
                                              std::to_string(files) + " files identical");
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pmass_acceptance <examples_cfg dir>\n";
    return 4;
  }
  Runs runs(argv[1]);
  const std::vector<std::pair<std::string, std::function<Outcome(Runs&)>>> criteria{
      {"hyperbolic rigidity", hyperbolic_rigidity},
      {"flux law", flux_law},
      {"pole asymptotics", pole},
      {"infinity expansion", infinity_fit},
      {"monotonicity", monotonicity},
      {"derivative decomposition", decomposition},
      {"mass positivity and limit", mass_and_limit},
      {"Q2 consistency", q2_consistency},
      {"Willmore and isoperimetric", willmore_isoperimetric},
      {"Yamabe", yamabe},
      {"dual pipeline", dual_pipeline},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second(runs);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL")
              << " | " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
