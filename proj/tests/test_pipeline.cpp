#include "pmass/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pmass;
namespace fs = std::filesystem;

namespace {

RunConfig example(const std::string& name) {
  return parse_config(std::string(PMASS_EXAMPLES_DIR) + "/" + name);
}

const ReportCheck* find_check(const RunReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.line.name == name) return &c;
  return nullptr;
}

const StageRecord* find_stage(const RunReport& rep, const std::string& name) {
  for (const auto& s : rep.stages)
    if (s.name == name) return &s;
  return nullptr;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pmass_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Pipeline, HyperbolicRunPassesAndEmitsFlatF) {
  const RunReport rep = run_pipeline(example("hyperbolic.ini"));
  EXPECT_EQ(rep.exit_code(), 0);
  EXPECT_TRUE(rep.checks_pass());
  ASSERT_EQ(rep.f_table.size(), 40u);

  const fs::path dir = scratch_dir("hyp");
  emit_report(rep, dir.string());
  for (const char* f : {"summary.txt", "status.json", "f_table.csv", "derivative_table.csv",
                        "f_profile.dat", "mass_table.csv", "mass_profile.dat"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "field.txt"));

  // column 7 of the emitted table is F
  std::ifstream in(dir / "f_table.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,term_linear,term_grad2,term_H,term_vol1,term_vol2,F", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 7; ++k) std::getline(ss, cell, ',');
    EXPECT_LE(std::abs(std::stod(cell)), 1e-8) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 40);
  fs::remove_all(dir);
}

TEST(Pipeline, InvalidMetricHitsTheGate) {
  const RunReport rep = run_pipeline(example("perturbed_warp_invalid.ini"));
  EXPECT_TRUE(rep.gate_failed);
  EXPECT_EQ(rep.exit_code(), 2);
  EXPECT_NE(rep.gate_message.find("R"), std::string::npos);
  ASSERT_NE(find_stage(rep, "mass"), nullptr);
  EXPECT_EQ(find_stage(rep, "mass")->status, "skipped");
  EXPECT_FALSE(rep.mass.has_value());
}

TEST(Pipeline, EnforcementOffReportsExpectedFailure) {
  RunConfig c = example("perturbed_warp_invalid.ini");
  c.enforce_hypotheses = false;
  const RunReport rep = run_pipeline(c);
  EXPECT_FALSE(rep.gate_failed);
  EXPECT_TRUE(rep.expected_fail);
  EXPECT_TRUE(rep.mass.has_value());
  const ReportCheck* h = find_check(rep, "hypotheses");
  ASSERT_NE(h, nullptr);
  EXPECT_FALSE(h->line.pass);
  EXPECT_FALSE(h->counted);
  EXPECT_NE(rep.exit_code(), 2);
}

TEST(Pipeline, MassBumpReportIsComplete) {
  const RunReport rep = run_pipeline(example("mass_bump_unit.ini"));
  EXPECT_EQ(rep.exit_code(), 0);
  ASSERT_TRUE(rep.mass.has_value());
  EXPECT_NEAR(rep.mass->m_vr, 19.502143145, 1e-8);
  ASSERT_TRUE(rep.audit.has_value());
  EXPECT_FALSE(rep.f_table.empty());
  EXPECT_EQ(rep.d_table.size(), rep.f_table.size());
  for (const auto& c : rep.checks)
    if (c.counted) {
      EXPECT_GE(c.line.margin(), 0.0) << c.line.name;
    }
  for (const char* name : {"monotone", "limit", "mass_sign", "willmore_reference", "isoperimetric_reference",
                           "exhaustion_independence", "flux_law", "pole_asymptotics"})
    EXPECT_NE(find_check(rep, name), nullptr) << name;
}

TEST(Pipeline, MassTableLastRowNearExtrapolation) {
  const RunReport rep = run_pipeline(example("mass_bump_unit.ini"));
  const fs::path dir = scratch_dir("table");
  emit_report(rep, dir.string());
  std::ifstream in(dir / "mass_table.csv");
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::stringstream ss(last);
  std::string cell;
  std::vector<double> cols;
  while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
  ASSERT_EQ(cols.size(), 5u);
  EXPECT_NEAR(cols[3], rep.mass->m_vr, 1e-6);
  EXPECT_EQ(cols[4], rep.mass->m_vr);
  fs::remove_all(dir);
}

TEST(Pipeline, RerunsAreByteIdentical) {
  for (const char* name : {"mass_bump_small.ini", "axisym_zero.ini"}) {
    RunConfig c = example(name);
    c.stage_yamabe = false;
    const fs::path a = scratch_dir("a"), b = scratch_dir("b");
    emit_report(run_pipeline(c), a.string());
    emit_report(run_pipeline(c), b.string());
    for (const auto& e : fs::directory_iterator(a))
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << name << " " << e.path().filename();
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Pipeline, StageSwitchesSkipWork) {
  RunConfig c = example("mass_bump_unit.ini");
  c.stage_levelsets = c.stage_audit = c.stage_yamabe = false;
  const RunReport rep = run_pipeline(c);
  EXPECT_TRUE(rep.f_table.empty());
  EXPECT_FALSE(rep.audit.has_value());
  EXPECT_TRUE(rep.mass.has_value());
  EXPECT_EQ(find_stage(rep, "levelsets")->status, "skipped");
  EXPECT_EQ(rep.exit_code(), 0);
}

TEST(Pipeline, YamabeSummaryOnSmallBump) {
  const RunReport rep = run_pipeline(example("mass_bump_small.ini"));
  EXPECT_EQ(rep.exit_code(), 0);
  ASSERT_TRUE(rep.yamabe.has_value());
  EXPECT_LE(rep.yamabe->residual, 1e-8);
  EXPECT_LE(rep.yamabe->uniqueness_gap, 1e-8);
  EXPECT_LE(std::abs(rep.yamabe->min_R_plus_6_out), 1e-6);
  EXPECT_LE(rep.yamabe->m_vr_out, rep.yamabe->m_vr_in + 1e-4);
}

TEST(Pipeline, AxisymFieldDump) {
  RunConfig c = example("axisym_zero.ini");
  c.dump_fields = true;
  const RunReport rep = run_pipeline(c);
  EXPECT_EQ(rep.exit_code(), 0);
  ASSERT_NE(rep.field, nullptr);
  const fs::path dir = scratch_dir("field");
  emit_report(rep, dir.string());
  EXPECT_TRUE(fs::exists(dir / "field.txt"));
  EXPECT_GT(fs::file_size(dir / "field.txt"), 0u);
  fs::remove_all(dir);
}

TEST(Pipeline, YamabeRequestOnAxisymIsSkipped) {
  RunConfig c = example("axisym_zero.ini");
  c.stage_yamabe = true;
  const RunReport rep = run_pipeline(c);
  const StageRecord* y = find_stage(rep, "yamabe");
  ASSERT_NE(y, nullptr);
  EXPECT_EQ(y->status, "skipped");
  EXPECT_EQ(rep.exit_code(), 0);
}

TEST(Pipeline, StatusJsonCarriesExitCode) {
  const RunReport rep = run_pipeline(example("perturbed_warp_invalid.ini"));
  const fs::path dir = scratch_dir("json");
  emit_report(rep, dir.string());
  const std::string s = slurp(dir / "status.json");
  EXPECT_NE(s.find("\"exit_code\""), std::string::npos);
  EXPECT_NE(s.find("2"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Pipeline, BadParametersBecomeConfigErrors) {
  RunConfig c = example("hyperbolic.ini");
  c.n_r = 3;
  EXPECT_THROW(run_pipeline(c), ConfigError);
}
