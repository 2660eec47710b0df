#include "kianc/config.hpp"

#include <sstream>

#include <gtest/gtest.h>

namespace kianc {
namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, ShippedFileMatchesDefaults) {
  const ConfigFile file = load_config(std::string(KIANC_SOURCE_DIR) + "/configs/default.cfg");
  const ConfigFile defaults;
  EXPECT_EQ(to_json(file), to_json(defaults));
  EXPECT_EQ(config_hash(file), config_hash(defaults));
  EXPECT_EQ(file.settings.iterations, 12000u);
  EXPECT_EQ(file.methods.size(), 4u);
  EXPECT_EQ(file.scenario.secondary_sources.size(), 16u);
  EXPECT_EQ(file.scenario.error_mics.size(), 48u);
}

TEST(Config, EmptyInputGivesDefaults) {
  EXPECT_EQ(to_json(parse("")), to_json(ConfigFile{}));
}

TEST(Config, OverridesApply) {
  const ConfigFile c = parse(
      "[run]\nfrequency_hz = 315\niterations = 500\nsnr_db = inf\nexcitation = constant\n"
      "grid = 5, 7, 3\n[methods]\nlist = MPC, IndividualKI:10:3\n"
      "[perturb]\nfrequencies = 150, 250\ntrials = 7\n[seeds]\nroot = 42\n");
  EXPECT_EQ(c.frequency_hz, 315.0);
  EXPECT_EQ(c.settings.iterations, 500u);
  EXPECT_TRUE(std::isinf(c.settings.snr_db));
  EXPECT_EQ(c.settings.excitation, Excitation::kConstant);
  EXPECT_EQ(c.settings.grid.nx, 5u);
  EXPECT_EQ(c.settings.grid.ny, 7u);
  ASSERT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.methods[1].label(), "IndividualKI(beta=10;beta_s=3)");
  EXPECT_EQ(c.perturb.frequencies_hz, (std::vector<double>{150.0, 250.0}));
  EXPECT_EQ(c.perturb.trials, 7u);
  EXPECT_EQ(c.settings.seed, 42u);
  EXPECT_NE(config_hash(c), config_hash(ConfigFile{}));
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(parse("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nfrequncy_hz = 200\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nfrequency_hz = abc\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nfrequency_hz = -5\n"), ConfigError);
  EXPECT_THROW(parse("[run]\niterations = -3\n"), ConfigError);
  EXPECT_THROW(parse("[run]\ngrid = 5, 5\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nexcitation = chirp\n"), ConfigError);
  EXPECT_THROW(parse("[nlms]\nmu0 = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("[methods]\nlist = LMS\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\nf_step = 0\n"), ConfigError);
  EXPECT_THROW(parse("[perturb]\ntrials = 0\n"), ConfigError);
  EXPECT_THROW(parse("[perturb]\nradial_std_m = -1\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\npreset = lab\n"), ConfigError);
  EXPECT_THROW(parse("[field]\nmethod = TotalKI\n"), ConfigError);
  // primary inside the target region
  EXPECT_THROW(parse("[scenario]\nprimary_source = 0, 0, 0\n"), ConfigError);
}

TEST(Config, MissingFileNamesPath) {
  try {
    load_config("/definitely/not/here.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/definitely/not/here.cfg"), std::string::npos);
  }
}

TEST(Config, RealList) {
  EXPECT_EQ(parse_real_list("1, 2.5 ,3e2"), (std::vector<double>{1.0, 2.5, 300.0}));
  EXPECT_TRUE(parse_real_list("").empty());
  EXPECT_THROW(parse_real_list("1, x"), ConfigError);
}

}  // namespace
}  // namespace kianc
