#include <gtest/gtest.h>

#include <cmath>

#include "epictrl/delay.hpp"
#include "epictrl/errors.hpp"
#include "epictrl/norms.hpp"
#include "support/support.hpp"

using namespace epictrl;
namespace t = epictrl::testing;

TEST(DelayLookup, PrehistoryAndStoredLevels) {
  const Mesh m = t::line(3);
  const TimeGrid time{1.0, 8};
  const double tau = 0.25;  // two steps
  DelayedHistory hist(Field(m, 7.0), time, tau);
  EXPECT_EQ(hist.lag_steps(), 2u);
  for (std::size_t k = 1; k <= 8; ++k) hist.push(Field(m, static_cast<double>(k)));

  EXPECT_EQ(delay_lookup(hist, tau / 2, tau)[0], 7.0);
  EXPECT_EQ(delay_lookup(hist, 0.0, tau)[0], 7.0);
  EXPECT_EQ(delay_lookup(hist, tau, tau)[0], 7.0);
  // t = 2 tau looks up time tau = level 2
  EXPECT_EQ(delay_lookup(hist, 2 * tau, tau)[0], 2.0);
  EXPECT_EQ(delay_lookup(hist, 1.0, tau)[0], 6.0);
  EXPECT_EQ(hist.shifted(3)[0], 1.0);
}

TEST(DelayLookup, MisalignedTauRejected) {
  const TimeGrid time{1.0, 10};
  EXPECT_THROW((void)delay_lag_steps(time, 0.25), ConfigError);
  EXPECT_THROW((void)delay_lag_steps(time, 0.0), ConfigError);
  EXPECT_EQ(delay_lag_steps(time, 0.3), 3u);
}

TEST(SolveDelay, TauEqualDtTracksOdeLimit) {
  const Mesh m = t::line(4);
  t::ScenarioSpec spec;
  spec.steps = 1000;
  spec.gamma = 0.0;
  const Scenario sc = t::make_scenario(m, spec, t::uniform_state(m, 0.9, 0.05, 0.05, 0.0));
  const ControlPair zero = t::constant_controls(sc, 0.0, 0.0);
  const Trajectory d = solve_delay(sc, zero, sc.time.dt());
  const double e_exact = 0.05 * std::exp(-0.3);
  const double i_exact = 0.05 * std::exp(-0.4) + 0.2 * 0.05 * (std::exp(-0.3) - std::exp(-0.4)) / 0.1;
  // O(dt) with dt = 1e-3
  EXPECT_LE(std::abs(d.back().e[0] - e_exact), 1e-3 * e_exact);
  EXPECT_LE(std::abs(d.back().i[0] - i_exact), 1e-3 * i_exact);
  const Trajectory f = solve_forward(sc, zero);
  EXPECT_LE(sup_h_distance(d.levels, f.levels), 1e-3 * sup_h_norm(f.levels));
}

TEST(SolveDelay, ZeroDataStaysZero) {
  const Mesh m = t::line(6);
  t::ScenarioSpec spec;
  spec.steps = 16;
  const Scenario sc = t::make_scenario(m, spec, EpidemicState::zeros(m));
  for (double tau : {1.0 / 16, 0.25, 1.0}) {
    const Trajectory d = solve_delay(sc, t::constant_controls(sc, 0.5, 0.5), tau);
    for (const auto& x : d.levels) {
      for (Compartment c : kCompartments) EXPECT_EQ(x[c].max(), 0.0);
    }
  }
}

// With u = 0 and gamma = 0 the s-equation is pure diffusion: neither the
// delayed exposed field nor r feeds back into it.
TEST(SolveDelay, SusceptiblesIndependentOfTauWithoutControls) {
  Scenario sc = t::delay_scenario(64, 16);
  sc.waning = WaningRate::constant(0.0, 64);
  const ControlPair zero = t::constant_controls(sc, 0.0, 0.0);
  const Trajectory ref = solve_delay(sc, zero, 1.0 / 64);
  for (double tau : {0.25, 0.5, 1.0}) {
    const Trajectory d = solve_delay(sc, zero, tau);
    for (std::size_t k = 0; k < d.size(); ++k) EXPECT_EQ(d[k].s, ref[k].s) << "tau " << tau << " level " << k;
  }
}

TEST(SolveDelay, NonnegativeForEveryTau) {
  const Scenario sc = t::delay_scenario(128, 16);
  const ControlPair u = t::constant_controls(sc, 1.0, 0.6);
  for (double tau : {1.0 / 128, 1.0 / 8, 0.5, 1.0}) {
    const Trajectory d = solve_delay(sc, u, tau);
    for (const auto& x : d.levels) {
      for (Compartment c : kCompartments) EXPECT_GE(x[c].min(), 0.0);
    }
  }
}

TEST(SolveDelay, TauMustDivideHorizon) {
  const Scenario sc = t::delay_scenario(120, 8);
  EXPECT_THROW((void)solve_delay(sc, t::constant_controls(sc, 0.1, 0.1), 0.4), ConfigError);
}

TEST(ConvergenceStudy, MonotoneFirstOrder) {
  const Scenario sc = t::delay_scenario(1024, 32);
  const ControlPair u = t::constant_controls(sc, 0.8, 0.3);
  const auto rows = convergence_study(sc, u, {0.25, 0.125, 0.0625}, 3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].order, 0.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].error, rows[k - 1].error);
    EXPECT_GE(rows[k].order, 0.7);
    EXPECT_LE(rows[k].order, 1.3);
    EXPECT_NEAR(rows[k - 1].conservation_defect / rows[k].conservation_defect, 2.0, 0.6);
  }
}

TEST(ConvergenceStudy, OrderUsesTauRatio) {
  const Scenario sc = t::delay_scenario(240, 8);
  const ControlPair u = t::constant_controls(sc, 0.8, 0.3);
  const auto rows = convergence_study(sc, u, {0.5, 0.125}, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[1].order, std::log(rows[0].error / rows[1].error) / std::log(4.0), 1e-12);
}
