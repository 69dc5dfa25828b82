#include "pmass/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace pmass;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, MinimalFileTakesDefaults) {
  const RunConfig c = parse_config_string("[metric]\nfamily = hyperbolic\n");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(parse_config_string("family = mass_bump\n").family, "mass_bump");
}

TEST(Config, ValuesAreRead) {
  const RunConfig c = parse_config_string(
      "[metric]\nfamily = mass_bump\nmass = 1\nphi_in = 1\nphi_out = 4\n"
      "[mass]\nmass_radii = 2, 3, 4.5\n[stages]\nyamabe = true\n[output]\nseed = 42\n");
  EXPECT_EQ(c.mass, 1.0);
  EXPECT_EQ(c.phi_out, 4.0);
  EXPECT_EQ(c.mass_radii, (std::vector<double>{2.0, 3.0, 4.5}));
  EXPECT_TRUE(c.stage_yamabe);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, MisspelledKeyGetsSuggestion) {
  const std::string msg = error_of("[metric]\nampltude = 0.1\n");
  EXPECT_NE(msg.find("ampltude"), std::string::npos);
  EXPECT_NE(msg.find("did you mean 'amplitude'"), std::string::npos);
}

TEST(Config, KeyInWrongSectionRejected) {
  EXPECT_NE(error_of("[grid]\namplitude = 0.1\n").find("belongs in section [metric]"), std::string::npos);
}

TEST(Config, UnknownSectionRejected) {
  EXPECT_NE(error_of("[solver]\nn_r = 10\n").find("unknown section [solver]"), std::string::npos);
}

TEST(Config, ParseErrorReportsLine) {
  EXPECT_NE(error_of("[metric]\nfamily = hyperbolic\n[broken\n").find("line 3"), std::string::npos);
}

TEST(Config, BadValuesNameTheKey) {
  EXPECT_NE(error_of("[grid]\nn_r = many\n").find("n_r"), std::string::npos);
  EXPECT_NE(error_of("[metric]\nphi_in = 2\nphi_out = 1\n").find("phi_out"), std::string::npos);
  EXPECT_NE(error_of("[metric]\nfamily = torus\n").find("family"), std::string::npos);
  EXPECT_NE(error_of("[mass]\nmass_radii = 3, 2, 4\n").find("mass_radii"), std::string::npos);
  EXPECT_NE(error_of("[tolerances]\ntol_limit = 0\n").find("tol_limit"), std::string::npos);
  EXPECT_NE(error_of("[stages]\nmass = maybe\n").find("mass"), std::string::npos);
}

TEST(Config, StrictModeGatesSlowDecay) {
  const std::string text = "[metric]\nfamily = perturbed_warp\ndelta = 0.5\n";
  EXPECT_NO_THROW(parse_config_string(text));
  EXPECT_THROW(parse_config_string(text + "[stages]\nstrict = true\n"), HypothesisGateError);
  EXPECT_NO_THROW(parse_config_string(text + "[stages]\nstrict = true\nmass = false\n"));
}

TEST(Config, RoundTripThroughIni) {
  RunConfig c;
  c.family = "axisym";
  c.base = "mass_bump";
  c.axisym_amplitude = 1e-4;
  c.r_in = 1.13;
  c.mass_radii = {3.0, 3.25, 4.1};
  c.tol_limit = 0.1 + 0.2;  // not exactly representable in short form
  c.seed = 123456789012345ull;
  EXPECT_EQ(parse_config_string(to_ini(c)), c);
  EXPECT_EQ(parse_config_string(to_ini(RunConfig{})), RunConfig{});
}

TEST(Config, MissingFile) {
  EXPECT_THROW(parse_config("/nonexistent/pmass.ini"), ConfigError);
}

TEST(Config, ReadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "pmass_test_config.ini";
  std::ofstream(path) << "[levels]\nn_t = 12\n";
  EXPECT_EQ(parse_config(path.string()).n_t, 12);
  std::filesystem::remove(path);
}

TEST(Config, ShippedExamplesParse) {
  for (const auto& e : std::filesystem::directory_iterator(PMASS_EXAMPLES_DIR))
    if (e.path().extension() == ".ini") {
      EXPECT_NO_THROW(parse_config(e.path().string())) << e.path();
    }
}

TEST(Config, SharedKeyNameResolvedBySection) {
  const RunConfig c = parse_config_string("[metric]\nmass = 0.5\n[stages]\nmass = false\n");
  EXPECT_EQ(c.mass, 0.5);
  EXPECT_FALSE(c.stage_mass);
  EXPECT_NE(error_of("mass = 0.5\n").find("ambiguous"), std::string::npos);
}
