#pragma once

// Pipeline: validate -> Green function -> level sets -> F audit -> mass ->
// optional Yamabe normalization, and the report writer.

#include "pmass/config.hpp"
#include "pmass/core.hpp"
#include "pmass/functional.hpp"
#include "pmass/functional_axisym.hpp"
#include "pmass/geometry.hpp"
#include "pmass/green_axisym.hpp"
#include "pmass/green_radial.hpp"
#include "pmass/levelset.hpp"
#include "pmass/mass.hpp"
#include "pmass/yamabe.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pmass {

struct ReportCheck {
  std::string stage;
  CheckLine line;
  bool counted = true;  // diagnostics and expected failures do not set the exit status
};

struct StageRecord {
  std::string name;
  std::string status;  // ok | failed | skipped
  std::string message;
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct YamabeSummary {
  int iterations = 0;
  double residual = 0.0;
  double min_chi = 0.0;
  double max_chi = 0.0;
  double decay = 0.0;
  double uniqueness_gap = 0.0;
  double min_R_plus_6_out = 0.0;
  double m_vr_in = 0.0;
  double m_vr_out = 0.0;
};

struct RunReport {
  RunConfig config;
  std::string metric_description;
  std::optional<CurvatureReport> validation;
  std::vector<MonotoneSample> f_table;
  std::vector<DerivativeSample> d_table;
  std::optional<AuditReport> audit;
  std::optional<MassReport> mass;
  std::optional<YamabeSummary> yamabe;
  std::vector<ReportCheck> checks;
  std::vector<NamedValue> values;
  std::vector<StageRecord> stages;
  std::shared_ptr<const GreenField> field;
  bool gate_failed = false;
  bool nonconvergence = false;
  bool expected_fail = false;
  std::string gate_message;

  bool checks_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ReportCheck& c) { return !c.counted || c.line.pass; });
  }
  /// 2 hypothesis gate, 3 nonconvergence, 1 failed check, 0 otherwise.
  int exit_code() const {
    if (gate_failed) return 2;
    if (nonconvergence) return 3;
    return checks_pass() ? 0 : 1;
  }
};

namespace detail {

inline CheckLine upper(std::string name, double value, double bound) {
  return {std::move(name), value, bound, value <= bound};
}

inline RadialMetric radial_base(const RunConfig& c, const std::string& family) {
  if (family == "hyperbolic") return make_hyperbolic(c.r_max);
  if (family == "perturbed_warp")
    return build_perturbed_warp(c.amplitude, c.delta, c.bump_center, c.bump_width, c.r_max);
  return build_mass_bump(c.mass, c.phi_in, c.phi_out, c.r_max);
}

// Deterministic uniform draws in [0, 1) from the configured seed.
class ProbeStream {
 public:
  explicit ProbeStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct StageScope {
  RunReport& rep;
  std::string name;
  bool done = false;

  void ok(std::string msg = "") {
    rep.stages.push_back({name, "ok", std::move(msg)});
    done = true;
  }
  void skip(std::string msg) {
    rep.stages.push_back({name, "skipped", std::move(msg)});
    done = true;
  }
  void fail(std::string msg) {
    rep.stages.push_back({name, "failed", std::move(msg)});
    done = true;
  }
};

inline void add(RunReport& rep, const std::string& stage, CheckLine line, bool counted = true) {
  rep.checks.push_back({stage, std::move(line), counted});
}

// Runs body, mapping numerical failures onto the stage record.
template <class Body>
void run_stage(RunReport& rep, const std::string& name, bool enabled, Body&& body) {
  StageScope st{rep, name};
  if (!enabled) {
    st.skip("disabled");
    return;
  }
  try {
    body(st);
    if (!st.done) st.ok();
  } catch (const ConvergenceError& e) {
    rep.nonconvergence = true;
    st.fail(std::string(e.what()) + " (residual " + format17(e.last_residual()) + ")");
  } catch (const RangeError& e) {
    rep.nonconvergence = true;
    st.fail(e.what());
  } catch (const Error& e) {
    st.fail(e.what());
    add(rep, name, {name + "_completed", 1.0, 0.0, false});
  }
}

inline std::string describe_violation(const CurvatureReport& v) {
  switch (v.verdict) {
    case Verdict::invalid_scalar:
      return "scalar curvature bound R >= -6 violated (min R+6 = " + format17(v.min_R_plus_6) +
             " at r = " + format17(v.argmin_r) + ")";
    case Verdict::invalid_decay: return "asymptotic decay slower than the declared rate";
    case Verdict::invalid_pole: return "metric is not smooth at the pole";
    default: return "";
  }
}

// Validation shared by both pipelines; returns whether theorem-dependent
// checks count towards the exit status.
inline bool gate(RunReport& rep, const CurvatureReport& v, double tol) {
  rep.validation = v;
  rep.values.push_back({"min_R_plus_6", v.min_R_plus_6});
  add(rep, "validate", {"hypotheses", -v.min_R_plus_6, tol, v.verdict == Verdict::valid},
      rep.config.enforce_hypotheses);
  if (v.verdict == Verdict::valid) return true;
  if (rep.config.enforce_hypotheses) {
    rep.gate_failed = true;
    rep.gate_message = describe_violation(v);
  } else {
    rep.expected_fail = true;
  }
  return false;
}

inline constexpr double auto_t_max = 6.0;

inline std::vector<double> t_grid(const RunConfig& c, double horizon) {
  // Past t = 6 the level areas reach e^12 and round-off in R + 6 starts to show.
  const double t_max = c.t_max > 0.0 ? c.t_max : std::min(auto_t_max, 0.8 * horizon);
  if (!(t_max > c.t_min)) throw RangeError("t grid: t_max does not exceed t_min");
  if (t_max >= horizon) throw RangeError("t grid: t_max lies beyond the truncation horizon");
  return geometric_grid(c.t_min, t_max, c.n_t);
}

template <class Ctx>
void derivative_checks(RunReport& rep, const Ctx& ctx, bool counted, bool radial) {
  const RunConfig& c = rep.config;
  double min_term = infinity, worst_ratio = 0.0, worst_fq = -infinity;
  for (const MonotoneSample& s : rep.f_table) {
    DerivativeSample d;
    d.t = s.t;
    d.regular = false;
    if (s.regular) {
      try {
        d = evaluate_Fprime(ctx, s.t, c.fprime_step);
        min_term = std::min({min_term, d.scalar_excess, d.gradient_term, d.sphere_comparison});
        const double allowed = std::max(c.tol_fprime_abs, c.tol_fprime_rel * std::abs(d.Fprime_numeric));
        worst_ratio = std::max(worst_ratio, std::abs(d.Fprime_numeric - d.Fprime_formula) / allowed);
        worst_fq = std::max(worst_fq, s.F - evaluate_Q(ctx, s.t));
      } catch (const CriticalLevelError&) {
        d = DerivativeSample{};
        d.t = s.t;
        d.regular = false;
      }
    }
    rep.d_table.push_back(d);
  }
  add(rep, "audit", {"decomposition_nonnegative", -min_term, c.tol_nonnegative, -min_term <= c.tol_nonnegative},
      counted);
  // Formula against differences of F; asserted on radial contexts only.
  add(rep, "audit", upper("fprime_consistency", worst_ratio, 1.0), counted && radial);
  add(rep, "audit", upper("F_below_Q", worst_fq, 1e-8));
}

inline void yamabe_stage(RunReport& rep, const RadialMetric& metric, bool counted) {
  const RunConfig& c = rep.config;
  const ConformalFactorProfile prof = solve_yamabe_radial(metric);
  YamabeConfig alt;
  alt.initial = [](double r) { return 1.0 + 0.05 * std::exp(-(r - 1.0) * (r - 1.0)); };
  const ConformalFactorProfile prof2 = solve_yamabe_radial(metric, alt);
  YamabeSummary y;
  y.iterations = prof.iterations;
  y.residual = prof.residual;
  y.min_chi = prof.min_chi();
  y.max_chi = *std::max_element(prof.chi.begin(), prof.chi.end());
  y.decay = prof.decay;
  for (std::size_t i = 0; i < prof.chi.size(); ++i)
    y.uniqueness_gap = std::max(y.uniqueness_gap, std::abs(prof.chi[i] - prof2.chi[i]));
  const RadialMetric out = conformal_metric(metric, prof);
  y.min_R_plus_6_out = validate_metric(out, 1e-6).min_R_plus_6;
  std::vector<double> radii;
  for (double r : c.mass_radii)
    if (r <= out.r_max) radii.push_back(r);
  y.m_vr_in = compute_m_vr(metric, c.mass_radii).m_vr;
  y.m_vr_out = radii.size() >= 3 ? compute_m_vr(out, radii).m_vr : std::numeric_limits<double>::quiet_NaN();
  rep.yamabe = y;
  add(rep, "yamabe", upper("yamabe_residual", y.residual, c.tol_yamabe_residual));
  add(rep, "yamabe", upper("yamabe_scalar_constant", std::abs(y.min_R_plus_6_out), c.tol_yamabe_scalar));
  add(rep, "yamabe", upper("yamabe_uniqueness", y.uniqueness_gap, c.tol_yamabe_unique));
  add(rep, "yamabe", upper("yamabe_min_chi_positive", -y.min_chi, 0.0));
  add(rep, "yamabe", upper("yamabe_supersolution", y.max_chi - 1.0, 1e-8), counted);
  add(rep, "yamabe", upper("yamabe_mass_nonincreasing", y.m_vr_out - y.m_vr_in, c.tol_yamabe_mass),
      counted);
}

// ---------------------------------------------------------------------------

inline void run_radial(RunReport& rep) {
  const RunConfig& c = rep.config;
  const RadialMetric metric = radial_base(c, c.family);
  rep.metric_description = "radial " + to_string(metric.family) + ", r_max " + format17(metric.r_max);
  bool theorem = true;
  run_stage(rep, "validate", c.stage_validate, [&](StageScope& st) {
    const double tol = c.tol_validate > 0.0 ? c.tol_validate : 1e-12;
    theorem = gate(rep, validate_metric(metric, tol), tol);
    if (!theorem) st.ok("hypotheses violated: " + describe_violation(*rep.validation));
  });
  const bool proceed = !rep.gate_failed;
  const bool counted = theorem;

  std::optional<GreenProfile> g;
  std::vector<double> ts;
  run_stage(rep, "green", c.stage_green, [&](StageScope&) {
    g.emplace(metric);
    ts = t_grid(c, t_horizon(*g));
    double worst = 0.0;
    for (double t : ts) {
      const double r = level_radius(*g, t);
      const double p = metric(r).value;
      worst = std::max(worst, std::abs(four_pi * p * p * g->grad_norm(r) - four_pi));
    }
    add(rep, "green", upper("flux_law", worst, c.tol_flux_radial));
    const double pole = 1e-3 * g->tail(1e-3);
    add(rep, "green", {"pole_asymptotics", 1.0 - pole, 2e-3, pole >= 0.998 && pole <= 1.0});
  });

  run_stage(rep, "levelsets", c.stage_levelsets && g.has_value(), [&](StageScope&) {
    double will = -infinity, iso = -infinity;
    for (double t : ts) {
      if (!(metric.chart_radius(level_radius(*g, t)) > 0.0)) continue;
      const ReferenceData d = reference_data(*g, t);
      will = std::max(will, willmore_check(d, c.tol_willmore).value);
      iso = std::max(iso, isoperimetric_check(d, c.tol_isoperimetric).value / std::max(1.0, d.area));
    }
    add(rep, "levelsets", upper("willmore_reference", will, c.tol_willmore));
    add(rep, "levelsets", upper("isoperimetric_reference", iso, c.tol_isoperimetric));
  });

  const bool need_mass = (c.stage_mass || c.stage_audit) && proceed;
  run_stage(rep, "mass", need_mass, [&](StageScope& st) {
    rep.mass = compute_m_vr(metric, c.mass_radii);
    rep.values.push_back({"m_vr", rep.mass->m_vr});
    rep.values.push_back({"mass_convergence_rate", rep.mass->convergence_rate});
    add(rep, "mass", {"mass_extrapolation_converged", rep.mass->converged ? 0.0 : 1.0, 0.0,
                      rep.mass->converged}, false);
    if (metric.family == Family::hyperbolic)
      add(rep, "mass", upper("hyperbolic_mass_zero", std::abs(rep.mass->m_vr), c.tol_hyperbolic_mass));
    if (g) {
      // sublevel exhaustion at parameters offset from the coordinate radii
      std::vector<double> lts;
      for (double r : c.mass_radii) lts.push_back(r + 0.25);
      if (lts.back() < t_horizon(*g)) {
        const MassReport ml = compute_m_vr_levelsets(*g, lts);
        rep.values.push_back({"m_vr_levelset_exhaustion", ml.m_vr});
        add(rep, "mass", upper("exhaustion_independence", std::abs(ml.m_vr - rep.mass->m_vr),
                               c.tol_exhaustion), counted);
      }
    }
    if (!c.stage_mass) st.ok("computed for the audit");
  });

  run_stage(rep, "audit", c.stage_audit && proceed && g.has_value() && rep.mass.has_value(),
            [&](StageScope&) {
    AuditTolerances tol{c.tol_monotonicity, c.tol_limit, c.tol_mass, c.tol_start_slope};
    AuditReport a = audit(*g, ts, rep.mass->m_vr, tol);
    a.expected_fail = !theorem;
    rep.f_table = a.samples;
    for (const CheckLine& l : a.checks) add(rep, "audit", l, counted);
    rep.values.push_back({"limit_estimate", a.limit_estimate});
    rep.values.push_back({"half_m_vr_minus_limit", a.limit_bound - a.limit_estimate});
    rep.audit = a;
    derivative_checks(rep, *g, counted, true);
    if (c.q2_t < t_horizon(*g) && metric.chart_radius(level_radius(*g, c.q2_t)) > 0.0) {
      const QSplit q = q_split(*g, c.q2_t);
      rep.values.push_back({"Q2_at_q2_t", q.Q2});
      add(rep, "audit", upper("Q2_limit", std::abs(q.Q2 - 0.5 * rep.mass->m_vr), c.tol_q2), counted);
    }
  });
  if (!g && c.stage_audit) rep.f_table.clear();

  run_stage(rep, "yamabe", c.stage_yamabe && proceed, [&](StageScope&) { yamabe_stage(rep, metric, counted); });
}

inline void run_axisym(RunReport& rep) {
  const RunConfig& c = rep.config;
  const RadialMetric base = radial_base(c, c.base);
  const AxisymMetric metric =
      build_axisym_perturbation(c.axisym_amplitude, c.r_in, c.r_out,
                                static_cast<unsigned>(c.angular_mode), base);
  rep.metric_description = "axisymmetric mode " + std::to_string(c.angular_mode) + " amplitude " +
                           format17(c.axisym_amplitude) + " on " + to_string(base.family);
  bool theorem = true;
  run_stage(rep, "validate", c.stage_validate, [&](StageScope& st) {
    const double tol = c.tol_validate > 0.0 ? c.tol_validate : 1e-6;
    theorem = gate(rep, validate_metric(metric, tol), tol);
    if (!theorem) st.ok("hypotheses violated: " + describe_violation(*rep.validation));
  });
  const bool proceed = !rep.gate_failed;
  const bool counted = theorem;

  GridSpec grid{c.grid_r_min, c.grid_r_max, c.n_r, c.n_theta,
                c.stretching == "uniform" ? Stretching::uniform : Stretching::exp_graded};
  std::optional<FieldContext> fine, coarse;
  std::vector<double> ts;
  run_stage(rep, "green", c.stage_green, [&](StageScope& st) {
    fine.emplace(solve_green_axisym(metric, grid));
    rep.field = std::make_shared<const GreenField>(fine->field());
    rep.values.push_back({"solver_relative_residual", fine->field().residual_norm()});
    add(rep, "green", upper("maximum_principle", fine->field().u().maxCoeff() - 1.0, 0.0));
    try {
      coarse.emplace(solve_green_axisym(metric, grid.refined(1, 2)));
    } catch (const ParameterError& e) {
      st.ok(std::string("no coarse grid for the error estimate: ") + e.what());
    }
    const double horizon = std::atanh(1.0 / (2.0 - fine->field().u_outer_min()));
    ts = t_grid(c, horizon);
    double worst = 0.0;
    for (double t : ts) {
      try {
        const double level = 2.0 - 1.0 / std::tanh(t);
        const double f = surface_integrals(*fine, extract_level_curve(*fine, level)).integrals.at("grad");
        double est = 0.0;
        if (coarse) {
          const double fc =
              surface_integrals(*coarse, extract_level_curve(*coarse, level)).integrals.at("grad");
          est = richardson_error(f, fc);
        }
        const double allowed = c.tol_flux_grid_factor * std::max(est, 1e-12 * four_pi);
        worst = std::max(worst, std::abs(f - four_pi) / allowed);
      } catch (const CriticalLevelError&) {
      }
    }
    add(rep, "green", upper("flux_law_over_grid_estimate", worst, 1.0), coarse.has_value());
  });

  run_stage(rep, "levelsets", c.stage_levelsets && fine.has_value(), [&](StageScope&) {
    double will = -infinity, iso = -infinity;
    for (double t : ts) {
      try {
        const LevelCurve curve = extract_level_curve(*fine, 2.0 - 1.0 / std::tanh(t));
        const double rmin = *std::min_element(curve.r.begin(), curve.r.end());
        if (!(rmin + base.chart_shift > 0.0)) continue;
        const ReferenceData d = reference_data(*fine, curve);
        will = std::max(will, willmore_check(d, c.tol_willmore).value);
        iso = std::max(iso, isoperimetric_check(d, c.tol_isoperimetric).value / std::max(1.0, d.area));
      } catch (const CriticalLevelError&) {
      }
    }
    add(rep, "levelsets", upper("willmore_reference", will, c.tol_willmore));
    add(rep, "levelsets", upper("isoperimetric_reference", iso, c.tol_isoperimetric));
    const double mid = 2.0 - 1.0 / std::tanh(ts[ts.size() / 2]);
    add(rep, "levelsets", coarea_check(*fine, mid, 1e-4 * (1.0 - mid), c.tol_coarea));
  });

  const bool need_mass = (c.stage_mass || c.stage_audit) && proceed;
  run_stage(rep, "mass", need_mass, [&](StageScope& st) {
    rep.mass = compute_m_vr(metric, c.mass_radii);
    rep.values.push_back({"m_vr", rep.mass->m_vr});
    rep.values.push_back({"mass_convergence_rate", rep.mass->convergence_rate});
    add(rep, "mass", {"mass_extrapolation_converged", rep.mass->converged ? 0.0 : 1.0, 0.0,
                      rep.mass->converged}, false);
    if (!c.stage_mass) st.ok("computed for the audit");
  });

  run_stage(rep, "audit", c.stage_audit && proceed && fine.has_value() && rep.mass.has_value(),
            [&](StageScope&) {
    AuditTolerances tol{c.tol_monotonicity, c.tol_limit, c.tol_mass, c.tol_start_slope};
    AuditReport a = audit(*fine, ts, rep.mass->m_vr, tol);
    a.expected_fail = !theorem;
    rep.f_table = a.samples;
    for (const CheckLine& l : a.checks) add(rep, "audit", l, counted);
    rep.values.push_back({"limit_estimate", a.limit_estimate});
    rep.values.push_back({"half_m_vr_minus_limit", a.limit_bound - a.limit_estimate});
    rep.audit = a;
    derivative_checks(rep, *fine, counted, false);
  });

  // Zero amplitude: the grid pipeline against the radial one on the base.
  run_stage(rep, "dual_pipeline", c.axisym_amplitude == 0.0 && fine.has_value() && coarse.has_value(),
            [&](StageScope&) {
    const GreenProfile g(base);
    ProbeStream probes(c.seed);
    double worst = 0.0;
    auto compare = [&](double a, double b, double ac) {
      const double allowed = c.tol_flux_grid_factor * std::max(richardson_error(a, ac), 1e-11 * (1.0 + std::abs(b)));
      worst = std::max(worst, std::abs(a - b) / allowed);
    };
    for (int k = 0; k < 16; ++k) {
      const double r = grid.r_min + (grid.r_max - grid.r_min) * (0.05 + 0.9 * probes.next());
      const double th = pi * (0.05 + 0.9 * probes.next());
      compare(fine->field().jet(r, th).u, g.u(r), coarse->field().jet(r, th).u);
    }
    compare(evaluate_F(*fine, 1.0).F, evaluate_F(g, 1.0).F, evaluate_F(*coarse, 1.0).F);
    const double mr = compute_m_vr(base, c.mass_radii).m_vr;
    const double ma = rep.mass ? rep.mass->m_vr : compute_m_vr(metric, c.mass_radii).m_vr;
    compare(ma, mr, ma);
    add(rep, "dual_pipeline", upper("zero_amplitude_equivalence", worst, 1.0));
  });

  if (c.stage_yamabe) rep.stages.push_back({"yamabe", "skipped", "radial metrics only"});
}

}  // namespace detail

inline RunReport run_pipeline(const RunConfig& config) {
  validate_config(config);
  RunReport rep;
  rep.config = config;
  try {
    if (config.family == "axisym")
      detail::run_axisym(rep);
    else
      detail::run_radial(rep);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: metric parameters rejected: ") + e.what());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report files.

namespace detail {

inline std::string csv17(std::initializer_list<double> xs) {
  std::string s;
  bool first = true;
  for (double x : xs) {
    if (!first) s += ',';
    s += format17(x);
    first = false;
  }
  return s;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("emit_report: cannot open '" + p.string() + "' for writing");
  out << text;
  if (!out) throw Error("emit_report: write failed for '" + p.string() + "'");
}

}  // namespace detail

inline std::string summary_text(const RunReport& rep) {
  using detail::format17;
  std::ostringstream os;
  os << "pmass run report\n";
  os << "metric: " << rep.metric_description << "\n";
  os << "exit status: " << rep.exit_code() << "\n";
  if (rep.gate_failed) os << "hypothesis gate: " << rep.gate_message << "\n";
  if (rep.expected_fail)
    os << "note: the metric violates the theorem hypotheses; dependent checks are informational\n";
  if (rep.validation) {
    const CurvatureReport& v = *rep.validation;
    os << "validator: " << to_string(v.verdict) << ", min R+6 = " << format17(v.min_R_plus_6)
       << " at r = " << format17(v.argmin_r) << "\n";
  }
  os << "\nstages\n";
  for (const StageRecord& s : rep.stages)
    os << "  " << s.name << ": " << s.status << (s.message.empty() ? "" : " (" + s.message + ")") << "\n";
  os << "\nchecks (value <= bound; margin = bound - value)\n";
  for (const ReportCheck& c : rep.checks)
    os << "  [" << (c.line.pass ? "PASS" : "FAIL") << "] " << c.stage << "/" << c.line.name
       << " value=" << format17(c.line.value) << " bound=" << format17(c.line.bound)
       << " margin=" << format17(c.line.margin()) << (c.counted ? "" : " (not counted)") << "\n";
  os << "\nvalues\n";
  for (const NamedValue& v : rep.values) os << "  " << v.name << " = " << format17(v.value) << "\n";
  if (rep.yamabe) {
    const YamabeSummary& y = *rep.yamabe;
    os << "\nyamabe: iterations=" << y.iterations << " residual=" << format17(y.residual)
       << " min_chi=" << format17(y.min_chi) << " max_chi=" << format17(y.max_chi)
       << " decay=" << format17(y.decay) << " uniqueness_gap=" << format17(y.uniqueness_gap)
       << " min_R_plus_6_out=" << format17(y.min_R_plus_6_out) << " m_vr_in=" << format17(y.m_vr_in)
       << " m_vr_out=" << format17(y.m_vr_out) << "\n";
  }
  os << "\nconfiguration\n" << to_ini(rep.config);
  return os.str();
}

/// Writes summary.txt, status.json, f_table.csv, derivative_table.csv,
/// mass_table.csv, f_profile.dat, mass_profile.dat and, on request,
/// field.txt into dir.
inline std::vector<std::filesystem::path> emit_report(const RunReport& rep,
                                                      const std::filesystem::path& dir) {
  using detail::csv17;
  using detail::format17;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("emit_report: cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    detail::write_file(dir / name, text);
    written.push_back(dir / name);
  };
  put("summary.txt", summary_text(rep));

  nlohmann::ordered_json st;
  st["exit_code"] = rep.exit_code();
  st["gate_failed"] = rep.gate_failed;
  st["nonconvergence"] = rep.nonconvergence;
  st["expected_fail"] = rep.expected_fail;
  st["verdict"] = rep.validation ? to_string(rep.validation->verdict) : "not run";
  for (const StageRecord& s : rep.stages) st["stages"][s.name] = s.status;
  for (const ReportCheck& c : rep.checks)
    st["checks"].push_back({{"stage", c.stage},
                            {"name", c.line.name},
                            {"pass", c.line.pass},
                            {"counted", c.counted},
                            {"value", format17(c.line.value)},
                            {"bound", format17(c.line.bound)},
                            {"margin", format17(c.line.margin())}});
  put("status.json", st.dump(2) + "\n");

  std::string f = "t,term_linear,term_grad2,term_H,term_vol1,term_vol2,F,Fprime_formula,Fprime_numeric,regular\n";
  std::string d = "t,gauss_bonnet_term,scalar_excess,gradient_term,sphere_comparison,Fprime_formula,Fprime_numeric,regular\n";
  std::string fp = "# t F\n";
  for (std::size_t i = 0; i < rep.f_table.size(); ++i) {
    const MonotoneSample& s = rep.f_table[i];
    const DerivativeSample dd = i < rep.d_table.size() ? rep.d_table[i] : DerivativeSample{};
    f += csv17({s.t, s.term_linear, s.term_grad2, s.term_H, s.term_vol1, s.term_vol2, s.F,
                dd.Fprime_formula, dd.Fprime_numeric}) +
         "," + (s.regular ? "1" : "0") + "\n";
    d += csv17({s.t, dd.gauss_bonnet_term, dd.scalar_excess, dd.gradient_term, dd.sphere_comparison,
                dd.Fprime_formula, dd.Fprime_numeric}) +
         "," + (dd.regular ? "1" : "0") + "\n";
    if (s.regular) fp += format17(s.t) + " " + format17(s.F) + "\n";
  }
  put("f_table.csv", f);
  put("derivative_table.csv", d);
  put("f_profile.dat", fp);

  std::string m = "r,boundary,volume,partial,extrapolated\n";
  std::string mp = "# r partial\n";
  if (rep.mass) {
    const MassReport& mr = *rep.mass;
    for (std::size_t i = 0; i < mr.radii.size(); ++i) {
      m += csv17({mr.radii[i], mr.boundary_terms[i], mr.volume_terms[i], mr.partial_sums[i], mr.m_vr}) + "\n";
      mp += format17(mr.radii[i]) + " " + format17(mr.partial_sums[i]) + "\n";
    }
  }
  put("mass_table.csv", m);
  put("mass_profile.dat", mp);

  if (rep.config.dump_fields && rep.field) {
    std::ostringstream os;
    dump_field(*rep.field, os);
    put("field.txt", os.str());
  }
  return written;
}

}  // namespace pmass
