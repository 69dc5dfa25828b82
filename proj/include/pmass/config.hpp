#pragma once

// Run configuration: sectioned key = value text. Every key has a default and
// belongs to exactly one section; keys may also be written at top level.

#include "pmass/core.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace pmass {

/// Malformed or inconsistent configuration (exit status 4).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Configuration that asks for a theorem outside its hypotheses (exit status 2).
class HypothesisGateError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  // [metric]
  std::string family = "hyperbolic";  // hyperbolic | perturbed_warp | mass_bump | axisym
  double amplitude = 0.01;            // perturbed_warp
  double delta = 3.0;                 // perturbed_warp decay rate
  double bump_center = 2.0;
  double bump_width = 0.5;
  double mass = 0.05;  // mass_bump (also the axisym base when base = mass_bump)
  double phi_in = 0.5;
  double phi_out = 2.0;
  double r_max = 10.5;

  // [axisym]
  std::string base = "hyperbolic";  // hyperbolic | mass_bump
  double axisym_amplitude = 0.0;
  double r_in = 1.0;
  double r_out = 2.0;
  int angular_mode = 2;

  // [grid]
  double grid_r_min = 0.02;
  double grid_r_max = 8.0;
  int n_r = 256;
  int n_theta = 64;
  std::string stretching = "uniform";  // uniform | exp_graded

  // [levels]
  double t_min = 0.05;
  double t_max = 0.0;  // 0: 0.8 of the largest level inside the truncation
  int n_t = 40;
  double fprime_step = 1e-3;

  // [mass]
  std::vector<double> mass_radii{3.0, 3.5, 4.0, 4.5, 5.0};
  double q2_t = 6.0;

  // [tolerances]
  double tol_validate = 0.0;  // 0: 1e-12 radial, 1e-6 axisym
  double tol_monotonicity = 1e-6;
  double tol_limit = 1e-4;
  double tol_mass = 1e-6;
  double tol_start_slope = 1.0;
  double tol_nonnegative = 1e-8;
  double tol_flux_radial = 1e-10;
  double tol_flux_grid_factor = 10.0;
  double tol_fprime_abs = 1e-4;
  double tol_fprime_rel = 0.01;
  double tol_q2 = 1e-3;
  double tol_willmore = 1e-6;
  double tol_isoperimetric = 1e-4;
  double tol_coarea = 1e-4;
  double tol_exhaustion = 1e-4;
  double tol_hyperbolic_mass = 1e-9;
  double tol_yamabe_residual = 1e-8;
  double tol_yamabe_scalar = 1e-6;
  double tol_yamabe_unique = 1e-8;
  double tol_yamabe_mass = 1e-4;

  // [stages]
  bool stage_validate = true;
  bool stage_green = true;
  bool stage_levelsets = true;
  bool stage_audit = true;
  bool stage_mass = true;
  bool stage_yamabe = false;
  bool enforce_hypotheses = true;
  bool strict = false;  // require delta > 1 for the mass stage

  // [output]
  std::string out_dir = "pmass_out";
  bool dump_fields = false;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError("config: key '" + key + "' expects a number, got '" + s + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw ConfigError("config: key '" + key + "' must be finite");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: key '" + key + "' expects true or false, got '" + s + "'");
}

struct KeyDef {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline KeyDef key(std::string sec, std::string name, double RunConfig::*m) {
  return {sec, name, [m, name](RunConfig& c, const std::string& v) { c.*m = parse_number<double>(name, v); },
          [m](const RunConfig& c) { return format17(c.*m); }};
}
inline KeyDef key(std::string sec, std::string name, int RunConfig::*m) {
  return {sec, name, [m, name](RunConfig& c, const std::string& v) { c.*m = parse_number<int>(name, v); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}
inline KeyDef key(std::string sec, std::string name, std::uint64_t RunConfig::*m) {
  return {sec, name,
          [m, name](RunConfig& c, const std::string& v) { c.*m = parse_number<std::uint64_t>(name, v); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}
inline KeyDef key(std::string sec, std::string name, bool RunConfig::*m) {
  return {sec, name, [m, name](RunConfig& c, const std::string& v) { c.*m = parse_bool(name, v); },
          [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}
inline KeyDef key(std::string sec, std::string name, std::string RunConfig::*m) {
  return {sec, name, [m](RunConfig& c, const std::string& v) { c.*m = trim(v); },
          [m](const RunConfig& c) { return c.*m; }};
}
inline KeyDef key(std::string sec, std::string name, std::vector<double> RunConfig::*m) {
  return {sec, name,
          [m, name](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(name, item));
            c.*m = out;
          },
          [m](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < (c.*m).size(); ++i) s += (i ? ", " : "") + format17((c.*m)[i]);
            return s;
          }};
}

inline const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> keys = {
      key("metric", "family", &RunConfig::family),
      key("metric", "amplitude", &RunConfig::amplitude),
      key("metric", "delta", &RunConfig::delta),
      key("metric", "bump_center", &RunConfig::bump_center),
      key("metric", "bump_width", &RunConfig::bump_width),
      key("metric", "mass", &RunConfig::mass),
      key("metric", "phi_in", &RunConfig::phi_in),
      key("metric", "phi_out", &RunConfig::phi_out),
      key("metric", "r_max", &RunConfig::r_max),
      key("axisym", "base", &RunConfig::base),
      key("axisym", "axisym_amplitude", &RunConfig::axisym_amplitude),
      key("axisym", "r_in", &RunConfig::r_in),
      key("axisym", "r_out", &RunConfig::r_out),
      key("axisym", "angular_mode", &RunConfig::angular_mode),
      key("grid", "grid_r_min", &RunConfig::grid_r_min),
      key("grid", "grid_r_max", &RunConfig::grid_r_max),
      key("grid", "n_r", &RunConfig::n_r),
      key("grid", "n_theta", &RunConfig::n_theta),
      key("grid", "stretching", &RunConfig::stretching),
      key("levels", "t_min", &RunConfig::t_min),
      key("levels", "t_max", &RunConfig::t_max),
      key("levels", "n_t", &RunConfig::n_t),
      key("levels", "fprime_step", &RunConfig::fprime_step),
      key("mass", "mass_radii", &RunConfig::mass_radii),
      key("mass", "q2_t", &RunConfig::q2_t),
      key("tolerances", "tol_validate", &RunConfig::tol_validate),
      key("tolerances", "tol_monotonicity", &RunConfig::tol_monotonicity),
      key("tolerances", "tol_limit", &RunConfig::tol_limit),
      key("tolerances", "tol_mass", &RunConfig::tol_mass),
      key("tolerances", "tol_start_slope", &RunConfig::tol_start_slope),
      key("tolerances", "tol_nonnegative", &RunConfig::tol_nonnegative),
      key("tolerances", "tol_flux_radial", &RunConfig::tol_flux_radial),
      key("tolerances", "tol_flux_grid_factor", &RunConfig::tol_flux_grid_factor),
      key("tolerances", "tol_fprime_abs", &RunConfig::tol_fprime_abs),
      key("tolerances", "tol_fprime_rel", &RunConfig::tol_fprime_rel),
      key("tolerances", "tol_q2", &RunConfig::tol_q2),
      key("tolerances", "tol_willmore", &RunConfig::tol_willmore),
      key("tolerances", "tol_isoperimetric", &RunConfig::tol_isoperimetric),
      key("tolerances", "tol_coarea", &RunConfig::tol_coarea),
      key("tolerances", "tol_exhaustion", &RunConfig::tol_exhaustion),
      key("tolerances", "tol_hyperbolic_mass", &RunConfig::tol_hyperbolic_mass),
      key("tolerances", "tol_yamabe_residual", &RunConfig::tol_yamabe_residual),
      key("tolerances", "tol_yamabe_scalar", &RunConfig::tol_yamabe_scalar),
      key("tolerances", "tol_yamabe_unique", &RunConfig::tol_yamabe_unique),
      key("tolerances", "tol_yamabe_mass", &RunConfig::tol_yamabe_mass),
      key("stages", "validate", &RunConfig::stage_validate),
      key("stages", "green", &RunConfig::stage_green),
      key("stages", "levelsets", &RunConfig::stage_levelsets),
      key("stages", "audit", &RunConfig::stage_audit),
      key("stages", "mass", &RunConfig::stage_mass),
      key("stages", "yamabe", &RunConfig::stage_yamabe),
      key("stages", "enforce_hypotheses", &RunConfig::enforce_hypotheses),
      key("stages", "strict", &RunConfig::strict),
      key("output", "out_dir", &RunConfig::out_dir),
      key("output", "dump_fields", &RunConfig::dump_fields),
      key("output", "seed", &RunConfig::seed),
  };
  return keys;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::string suggest(const std::string& name) {
  std::string best;
  std::size_t d = 4;  // farther than this is not a typo
  for (const KeyDef& k : key_table()) {
    const std::size_t e = edit_distance(name, k.name);
    if (e < d) {
      d = e;
      best = k.name;
    }
  }
  return best;
}

}  // namespace detail

/// Range and consistency checks; throws ConfigError naming the key, or
/// HypothesisGateError for the delta gate under strict mode.
inline void validate_config(const RunConfig& c) {
  auto need = [](bool ok, const std::string& key, const std::string& why) {
    if (!ok) throw ConfigError("config: key '" + key + "' " + why);
  };
  const std::vector<std::string> families{"hyperbolic", "perturbed_warp", "mass_bump", "axisym"};
  need(std::find(families.begin(), families.end(), c.family) != families.end(), "family",
       "must be one of hyperbolic, perturbed_warp, mass_bump, axisym");
  need(c.base == "hyperbolic" || c.base == "mass_bump", "base", "must be hyperbolic or mass_bump");
  need(c.stretching == "uniform" || c.stretching == "exp_graded", "stretching",
       "must be uniform or exp_graded");
  need(c.delta > 0.0, "delta", "must be positive");
  need(c.bump_width > 0.0, "bump_width", "must be positive");
  need(c.mass >= 0.0, "mass", "must be nonnegative");
  need(c.phi_in > 0.0, "phi_in", "must be positive");
  need(c.phi_out > c.phi_in, "phi_out", "must exceed phi_in");
  need(c.r_max > 2.0, "r_max", "must exceed 2");
  need(c.r_in > 0.0, "r_in", "must be positive");
  need(c.r_out > c.r_in, "r_out", "must exceed r_in");
  need(c.angular_mode >= 0, "angular_mode", "must be nonnegative");
  need(c.grid_r_min > 0.0, "grid_r_min", "must be positive");
  need(c.grid_r_max > c.grid_r_min, "grid_r_max", "must exceed grid_r_min");
  need(c.grid_r_max <= c.r_max, "grid_r_max", "must not exceed r_max");
  need(c.n_r >= 16, "n_r", "must be at least 16");
  need(c.n_theta >= 16, "n_theta", "must be at least 16");
  need(c.t_min > 0.0, "t_min", "must be positive");
  need(c.t_max == 0.0 || c.t_max > c.t_min, "t_max", "must be 0 (automatic) or exceed t_min");
  need(c.n_t >= 4, "n_t", "must be at least 4");
  need(c.fprime_step > 0.0, "fprime_step", "must be positive");
  need(c.mass_radii.size() >= 3, "mass_radii", "needs at least three radii");
  for (std::size_t i = 0; i < c.mass_radii.size(); ++i) {
    need(c.mass_radii[i] > 0.0 && c.mass_radii[i] <= c.r_max, "mass_radii",
         "entries must lie in (0, r_max]");
    need(i == 0 || c.mass_radii[i] > c.mass_radii[i - 1], "mass_radii", "must increase");
  }
  need(c.q2_t > 0.0, "q2_t", "must be positive");
  for (const auto& k : detail::key_table())
    if (k.section == "tolerances" && k.name != "tol_validate")
      need(detail::parse_number<double>(k.name, k.get(c)) > 0.0, k.name, "must be positive");
  need(c.tol_validate >= 0.0, "tol_validate", "must be nonnegative");
  need(!c.out_dir.empty(), "out_dir", "must not be empty");

  if (c.strict && c.stage_mass && c.family == "perturbed_warp" && !(c.delta > 1.0))
    throw HypothesisGateError("config: key 'delta' = " + detail::format17(c.delta) +
                              " violates the mass-theorem hypothesis delta > 1 (strict mode)");
}

inline RunConfig parse_config_string(const std::string& text, const std::string& origin = "<string>") {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: parse error in " + origin + " at line " + std::to_string(e.line()) +
                      ": " + e.message());
  }
  RunConfig c;
  const auto& keys = detail::key_table();
  auto apply = [&](const std::string& section, const std::string& name, const std::string& value) {
    auto named = [&](const detail::KeyDef& k) { return k.name == name; };
    const auto n = std::count_if(keys.begin(), keys.end(), named);
    if (n == 0) {
      const std::string s = detail::suggest(name);
      throw ConfigError("config: unknown key '" + name + "'" +
                        (s.empty() ? std::string() : " (did you mean '" + s + "'?)"));
    }
    // 'mass' names both a metric parameter and a stage switch
    if (section.empty() && n > 1)
      throw ConfigError("config: key '" + name + "' is ambiguous outside a section");
    auto it = std::find_if(keys.begin(), keys.end(), [&](const detail::KeyDef& k) {
      return named(k) && (section.empty() || k.section == section);
    });
    if (it == keys.end()) {
      it = std::find_if(keys.begin(), keys.end(), named);
      throw ConfigError("config: key '" + name + "' belongs in section [" + it->section + "], not [" +
                        section + "]");
    }
    it->set(c, value);
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply("", name, node.data());
      continue;
    }
    const bool known_section = std::any_of(keys.begin(), keys.end(),
                                           [&](const detail::KeyDef& k) { return k.section == name; });
    if (!known_section) throw ConfigError("config: unknown section [" + name + "]");
    for (const auto& [sub, leaf] : node) apply(name, sub, leaf.data());
  }
  validate_config(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

/// Fully defaulted text form; parse_config_string(to_ini(c)) == c.
inline std::string to_ini(const RunConfig& c) {
  std::string out, section;
  for (const auto& k : detail::key_table()) {
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + k.section + "]\n";
      section = k.section;
    }
    out += k.name + " = " + k.get(c) + "\n";
  }
  return out;
}

}  // namespace pmass
