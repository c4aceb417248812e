#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "epictrl/config.hpp"
#include "epictrl/errors.hpp"
#include "epictrl/io.hpp"
#include "epictrl/random.hpp"
#include "support/support.hpp"

using namespace epictrl;
namespace fs = std::filesystem;
namespace t = epictrl::testing;

namespace {

const char* kMinimal = R"(
[mesh]
dimension = 1
cells = [8]
lengths = [2.0]

[time]
horizon = 1.0
steps = 10

[rates]
sigma = 0.2
phi_e = 0.1
phi_r = 0.4

[diffusion]
kappa_lo = 0.001
kappa_hi = 1.0
s = 0.01
e = 0.01
i = 0.01
r = 0.01

[initial]
s = 0.9
e = 0.05
i = 0.05
r = 0.0

[control]
ui_max = 1.0
ue_max = 0.5

[threshold]
lambda = 0.2
)";

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config_text(text, ".", {}, "case.toml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "config was accepted";
  return {};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("epictrl_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(Config, MinimalDefaults) {
  const ScenarioConfig cfg = parse_config_text(kMinimal, ".");
  EXPECT_EQ(cfg.scenario.mesh.num_cells(), 8u);
  EXPECT_DOUBLE_EQ(cfg.scenario.mesh.cell_volume(), 0.25);
  EXPECT_EQ(cfg.scenario.time.steps, 10u);
  EXPECT_EQ(cfg.scenario.waning.steps(), 10u);
  EXPECT_EQ(cfg.scenario.waning.max(), 0.0);
  EXPECT_EQ(cfg.initial_guess, InitialGuess::HalfMax);
  EXPECT_EQ(cfg.optimizer.max_iters, OptimizerOptions{}.max_iters);
  EXPECT_TRUE(cfg.tau_list.empty());
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_FALSE(cfg.output.snapshots);
  EXPECT_DOUBLE_EQ(cfg.scenario.bounds.ue_max(9, 7), 0.5);
  EXPECT_DOUBLE_EQ(initial_controls(cfg).ui(3, 3), 0.5);
  EXPECT_EQ(cfg.hash, fnv1a64(kMinimal));
}

TEST(Config, BumpAndFileFields) {
  const fs::path dir = fs::temp_directory_path() / "epictrl_cfg_fields";
  fs::create_directories(dir);
  const Mesh m = t::line(8, 2.0);
  Field s(m);
  for (std::size_t c = 0; c < 8; ++c) s[c] = 0.1 * static_cast<double>(c);
  write_snapshot(dir / "s0.csv", s, 0, "s");
  std::string text = replaced(kMinimal, "s = 0.9", "s = { file = \"s0.csv\" }");
  text = replaced(text, "e = 0.05", "e = { base = 0.1, bump_amplitude = 0.5, bump_center = [1.0], bump_width = 0.5 }");
  const ScenarioConfig cfg = parse_config_text(text, dir);
  EXPECT_EQ(cfg.scenario.initial.s, s);
  const double x = m.center(2, 0);
  EXPECT_DOUBLE_EQ(cfg.scenario.initial.e[2], 0.1 + 0.5 * std::exp(-(x - 1.0) * (x - 1.0) / 0.25));
  fs::remove_all(dir);
}

TEST(Config, SigmaZeroNamesKeyAndAssumption) {
  try {
    (void)parse_config_text(replaced(kMinimal, "sigma = 0.2", "sigma = 0.0"), ".");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.assumption(), Assumption::SigmaPositive);
    const std::string what = e.what();
    EXPECT_NE(what.find("sigma must be positive"), std::string::npos) << what;
    EXPECT_NE(what.find("rates.sigma"), std::string::npos) << what;
  }
}

TEST(Config, WaningStepRestriction) {
  try {
    (void)parse_config_text(replaced(kMinimal, "[diffusion]", "[waning]\ngamma = 20.0\n\n[diffusion]"), ".");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.assumption(), Assumption::RPositivityStep);
    EXPECT_NE(std::string(e.what()).find("time.steps"), std::string::npos);
  }
  // gamma per step
  std::string list = "[waning]\ngamma = [0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.2, 0.2]\n\n[diffusion]";
  const ScenarioConfig cfg = parse_config_text(replaced(kMinimal, "[diffusion]", list), ".");
  EXPECT_DOUBLE_EQ(cfg.scenario.waning.at(7), 0.2);
  list = "[waning]\ngamma = [0.1, 0.1]\n\n[diffusion]";
  EXPECT_THROW((void)parse_config_text(replaced(kMinimal, "[diffusion]", list), "."), ValidationError);
}

TEST(Config, ErrorsCarryPosition) {
  const std::string syntax = config_error(replaced(kMinimal, "sigma = 0.2", "sigma = = 0.2"));
  EXPECT_EQ(syntax.rfind("case.toml:12:", 0), 0u) << syntax;

  const std::string unknown = config_error(replaced(kMinimal, "phi_r = 0.4", "phi_r = 0.4\nbeta = 1.0"));
  EXPECT_NE(unknown.find("case.toml:15:"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("key 'rates.beta': unknown key"), std::string::npos) << unknown;

  const std::string typed = config_error(replaced(kMinimal, "steps = 10", "steps = \"ten\""));
  EXPECT_NE(typed.find("time.steps"), std::string::npos) << typed;

  const std::string missing = config_error(replaced(kMinimal, "[threshold]\nlambda = 0.2", ""));
  EXPECT_NE(missing.find("threshold"), std::string::npos) << missing;
}

TEST(Config, DtOverride) {
  const ScenarioConfig base = parse_config_text(kMinimal, ".");
  const ScenarioConfig fine = parse_config_text(kMinimal, ".", ConfigOverrides{0.025});
  EXPECT_EQ(fine.scenario.time.steps, 40u);
  EXPECT_EQ(fine.scenario.bounds.ui_max.steps(), 40u);
  EXPECT_NE(fine.hash, base.hash);
  EXPECT_THROW((void)parse_config_text(kMinimal, ".", ConfigOverrides{0.3}), ConfigError);
}

TEST(Config, TauParsing) {
  EXPECT_DOUBLE_EQ(parse_tau("T/8", 2.0), 0.25);
  EXPECT_DOUBLE_EQ(parse_tau("1/8", 2.0), 0.125);
  EXPECT_DOUBLE_EQ(parse_tau(" 0.5 ", 2.0), 0.5);
  EXPECT_THROW((void)parse_tau("T/0", 1.0), ConfigError);
  EXPECT_THROW((void)parse_tau("-1", 1.0), ConfigError);
  EXPECT_THROW((void)parse_tau("x", 1.0), ConfigError);
  const auto list = parse_tau_list("T/4,T/8, T/16", 1.0);
  ASSERT_EQ(list.size(), 3u);
  EXPECT_DOUBLE_EQ(list[2], 0.0625);
}

TEST_F(TempDir, SnapshotRoundTripIsBitwise) {
  UniformStream rng(9);
  for (const Mesh& m : {t::line(13, 0.7), t::rect(8, 8, 1.0, 3.0)}) {
    Field f(m);
    for (std::size_t c = 0; c < m.num_cells(); ++c) f[c] = rng.next() * 1e-7 + rng.next();
    const fs::path p = dir_ / "snap.csv";
    write_snapshot(p, f, 42, "i");
    const Snapshot back = read_snapshot(p, m);
    EXPECT_EQ(back.field, f);
    EXPECT_EQ(back.level, 42u);
    EXPECT_EQ(back.name, "i");
  }
}

TEST_F(TempDir, SnapshotRowsAndMismatch) {
  const Mesh m = t::rect(8, 8);
  const fs::path p = dir_ / "snap.csv";
  write_snapshot(p, Field(m, 0.5), 0);
  std::ifstream in(p);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 64u + 2u);
  EXPECT_THROW((void)read_snapshot(p, t::rect(8, 4)), FormatError);
  EXPECT_THROW((void)read_snapshot(p, t::line(64)), FormatError);
  EXPECT_THROW((void)read_snapshot(dir_ / "absent.csv"), FormatError);
  {
    std::ofstream bad(dir_ / "bad.csv");
    bad << "# epictrl-snapshot dimension=1 cells=3 lengths=1 level=0 name=x\nvalue\n1\n2\n";
  }
  EXPECT_THROW((void)read_snapshot(dir_ / "bad.csv"), FormatError);
}

TEST(Io, HashAndFormatting) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
  EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
}
