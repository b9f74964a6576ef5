#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "windfarm/aero_tables.hpp"
#include "windfarm/errors.hpp"

namespace wf = windfarm;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

wf::AeroTables ramp_table() {
  // C_P = 0.1 lambda + pitch on the corners, bilinear inside.
  return wf::AeroTables({0.0, 10.0}, {0.0, 0.5}, {0.0, 0.5, 0.5, 0.5}, {0.1, 0.2, 0.3, 0.4});
}

}  // namespace

TEST(AnalyticPowerCoefficient, PeakNearDesignTipSpeedRatio) {
  double best = 0.0;
  double best_lambda = 0.0;
  for (double lambda = 5.0; lambda <= 10.0; lambda += 0.001) {
    const double cp = wf::analytic_power_coefficient(lambda, 0.0);
    if (cp > best) {
      best = cp;
      best_lambda = lambda;
    }
  }
  EXPECT_NEAR(best_lambda, 7.55, 0.01);
  EXPECT_NEAR(best, 0.484, 0.002);
}

TEST(AnalyticPowerCoefficient, BoundedAndZeroAtStandstill) {
  EXPECT_EQ(wf::analytic_power_coefficient(0.0, 0.0), 0.0);
  EXPECT_EQ(wf::analytic_power_coefficient(-1.0, 0.1), 0.0);
  for (double lambda = 0.0; lambda <= 18.0; lambda += 0.25) {
    for (double pitch = 0.0; pitch <= 90.0 * kDeg; pitch += kDeg) {
      const double cp = wf::analytic_power_coefficient(lambda, pitch);
      EXPECT_GE(cp, 0.0);
      EXPECT_LE(cp, wf::kBetzLimit);
    }
  }
}

TEST(AnalyticPowerCoefficient, PitchingToFeatherSheds) {
  for (double lambda = 4.0; lambda <= 12.0; lambda += 0.5) {
    double previous = wf::analytic_power_coefficient(lambda, 0.0);
    for (double pitch = 0.5 * kDeg; pitch <= 30.0 * kDeg; pitch += 0.5 * kDeg) {
      const double cp = wf::analytic_power_coefficient(lambda, pitch);
      if (previous > 0.01) EXPECT_LT(cp, previous) << "lambda " << lambda << " pitch " << pitch;
      previous = cp;
    }
  }
}

TEST(MomentumThrust, ZeroPowerGivesZeroThrust) { EXPECT_EQ(wf::momentum_thrust_coefficient(0.0, 0.48), 0.0); }

TEST(MomentumThrust, PeakMapsToBetzInduction) {
  // a = 1/3 -> C_T = 4a(1-a) = 8/9
  EXPECT_NEAR(wf::momentum_thrust_coefficient(0.48, 0.48), 8.0 / 9.0, 1e-12);
}

TEST(MomentumThrust, InvertsPowerRelation) {
  const double cp_max = 0.45;
  const double loss = cp_max / (16.0 / 27.0);
  const double a = 0.2;
  const double cp = loss * 4.0 * a * (1.0 - a) * (1.0 - a);
  EXPECT_NEAR(wf::momentum_thrust_coefficient(cp, cp_max), 4.0 * a * (1.0 - a), 1e-12);
}

TEST(AeroTables, DefaultGridOptimum) {
  const wf::AeroTables t = wf::AeroTables::generate_default();
  EXPECT_NEAR(t.optimal_tip_speed_ratio(), 7.55, 0.026);
  EXPECT_EQ(t.fine_pitch(), 0.0);
  EXPECT_EQ(t.power_coefficient(t.optimal_tip_speed_ratio(), t.fine_pitch()).value, t.max_power_coefficient());
}

TEST(AeroTables, BilinearInterpolation) {
  const wf::AeroTables t = ramp_table();
  EXPECT_DOUBLE_EQ(t.power_coefficient(5.0, 0.25).value, (0.0 + 0.5 + 0.5 + 0.5) / 4.0);
  EXPECT_DOUBLE_EQ(t.thrust_coefficient(5.0, 0.25).value, 0.25);
  EXPECT_DOUBLE_EQ(t.thrust_coefficient(2.5, 0.0).value, 0.1 + 0.25 * 0.2);
  EXPECT_FALSE(t.thrust_coefficient(2.5, 0.0).extrapolated);
}

TEST(AeroTables, OutsideGridClampsAndFlags) {
  const wf::AeroTables t = ramp_table();
  const auto below = t.thrust_coefficient(-3.0, 0.0);
  EXPECT_TRUE(below.extrapolated);
  EXPECT_DOUBLE_EQ(below.value, 0.1);
  const auto above = t.thrust_coefficient(12.0, 0.9);
  EXPECT_TRUE(above.extrapolated);
  EXPECT_DOUBLE_EQ(above.value, 0.4);
}

TEST(AeroTables, RejectsMalformedGrids) {
  EXPECT_THROW(wf::AeroTables({0.0, 1.0}, {0.0, 1.0}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1, 0.1}), wf::ConfigError);
  EXPECT_THROW(wf::AeroTables({1.0, 0.0}, {0.0, 1.0}, {0.1, 0.1, 0.1, 0.1}, {0.1, 0.1, 0.1, 0.1}), wf::ConfigError);
  EXPECT_THROW(wf::AeroTables({0.0, 1.0}, {0.0, 1.0}, {0.1, 0.1, 0.1, 0.7}, {0.1, 0.1, 0.1, 0.1}), wf::ConfigError);
}

TEST(AeroTables, SaveLoadRoundTrip) {
  const wf::AeroTables t = ramp_table();
  const auto path = std::filesystem::temp_directory_path() / "windfarm_aero_roundtrip.txt";
  t.save(path);
  const wf::AeroTables back = wf::AeroTables::load(path);
  EXPECT_EQ(back.tip_speed_ratios(), t.tip_speed_ratios());
  EXPECT_EQ(back.pitch_angles(), t.pitch_angles());
  EXPECT_EQ(back.power_table(), t.power_table());
  EXPECT_EQ(back.thrust_table(), t.thrust_table());
  std::filesystem::remove(path);
}

TEST(AeroTables, LoadMissingFileIsConfigError) {
  EXPECT_THROW(wf::AeroTables::load("/nonexistent/tables.txt"), wf::ConfigError);
}
