#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>
#include <vector>

#include "windfarm/errors.hpp"
#include "windfarm/metrics.hpp"
#include "windfarm/reference_signal.hpp"
#include "windfarm/scenario_config.hpp"
#include "windfarm/simulation.hpp"
#include "windfarm/turbine.hpp"

namespace wf = windfarm;

namespace {

const wf::AeroTables& tables() {
  static const wf::AeroTables t = wf::AeroTables::generate_default();
  return t;
}

wf::ScenarioConfig short_run(double inflow, int setting_case, double duration = 600.0) {
  wf::ScenarioConfig c;
  c.inflow = inflow;
  c.duration = duration;
  c.controller.setting_case = setting_case;
  c.metrics_window = {300.0, duration};
  return c;
}

}  // namespace

TEST(ScenarioConfig, EmptyDocumentGivesDefaults) {
  const wf::ScenarioConfig c = wf::parse_scenario("");
  EXPECT_EQ(c.turbine_count(), 9U);
  EXPECT_EQ(c.sample_time, 0.1);
  EXPECT_EQ(c.duration, 1200.0);
  EXPECT_EQ(c.step_count(), 12000U);
  EXPECT_EQ(c.signal.derate_fraction, 0.5);
  EXPECT_EQ(c.controller.setting_case, 2);
  EXPECT_EQ(c.farm_rated_power(), 45e6);
}

TEST(ScenarioConfig, ParsesSections) {
  const wf::ScenarioConfig c = wf::parse_scenario(R"(
name: demo
inflow: 12.5
duration: 100
layout: {rows: 2, columns: 2, spacing_diameters: 6}
controller: {setting_case: 1, tcl_gain: [0.1, 0.2, 0.3, 0.4], distribution: masked}
signal: {program: segments, segments: [[0, 0.5], [50, 0.6]]}
metrics: {window: [10, 90]}
)");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.turbine_count(), 4U);
  EXPECT_EQ(c.layout.positions[1].y, 6.0 * 126.0);
  EXPECT_EQ(c.controller.tcl_gains, (std::vector<double>{0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(c.controller.distribution, wf::CompensationDistribution::kMasked);
  EXPECT_EQ(c.signal.program, wf::SignalProgram::kSegments);
  EXPECT_FALSE(c.farm_control_config().tcl_enabled);
}

TEST(ScenarioConfig, RejectsInvalidInput) {
  EXPECT_THROW(wf::parse_scenario("inflw: 12"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("inflow: fast"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("sample_time: 0"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("duration: 100.05"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("signal: {derate_fraction: 1.5}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("signal: {derate_fraction: 0}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("controller: {setting_case: 3}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("controller: {distribution: sideways}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("signal: {program: file}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("duration: 200"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("layout: {positions: [[0, 0], [0, 0]]}"), wf::ConfigError);
  EXPECT_THROW(wf::parse_scenario("inflow: [1, 2"), wf::ConfigError);
  EXPECT_THROW(wf::load_scenario("/nonexistent/config.yaml"), wf::ConfigError);
}

TEST(ScenarioConfig, RepositoryConfigsLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(WINDFARM_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(wf::load_scenario(entry.path())) << entry.path();
  }
}

TEST(ReferenceSignal, DeratedBeforeEngagement) {
  const wf::ScenarioConfig c;
  const wf::ReferenceSignal s(c.signal, c.farm_rated_power(), c.duration);
  EXPECT_DOUBLE_EQ(s(100.0), 22.5e6);
  EXPECT_DOUBLE_EQ(s(0.0), 22.5e6);
  EXPECT_FALSE(s.engaged(299.9));
  EXPECT_TRUE(s.engaged(300.0));
}

TEST(ReferenceSignal, PeakIsSeventyPercent) {
  const wf::ScenarioConfig c;
  const wf::ReferenceSignal s(c.signal, c.farm_rated_power(), c.duration);
  double peak = 0.0;
  for (std::size_t k = 0; k <= c.step_count(); ++k) peak = std::max(peak, s(static_cast<double>(k) * 0.1));
  EXPECT_NEAR(peak, 31.5e6, 1e-6);
  EXPECT_EQ(wf::synthetic_shape(0.0), 0.0);
}

TEST(ReferenceSignal, ConstantProgram) {
  wf::SignalConfig sc;
  sc.program = wf::SignalProgram::kConstant;
  const wf::ReferenceSignal s(sc, 45e6, 1200.0);
  EXPECT_DOUBLE_EQ(s(500.0), 31.5e6);
}

TEST(ReferenceSignal, SegmentsInterpolate) {
  wf::SignalConfig sc;
  sc.program = wf::SignalProgram::kSegments;
  sc.segments = {{0.0, 0.5}, {100.0, 0.7}};
  const wf::ReferenceSignal s(sc, 10e6, 1200.0);
  EXPECT_DOUBLE_EQ(s(350.0), 6e6);
  EXPECT_DOUBLE_EQ(s(900.0), 7e6);
}

TEST(ReferenceSignal, FileReplayedSampleExact) {
  const auto path = std::filesystem::temp_directory_path() / "windfarm_reference.csv";
  {
    std::ofstream out(path);
    out << std::setprecision(17) << "t,P_ref_WF\n";
    for (int k = 0; k <= 100; ++k) out << k * 0.1 << "," << 1e6 + 12345.678 * k << "\n";
  }
  wf::SignalConfig sc;
  sc.program = wf::SignalProgram::kFile;
  sc.file = path;
  const wf::ReferenceSignal s(sc, 45e6, 10.0);
  for (int k = 0; k <= 100; ++k) EXPECT_DOUBLE_EQ(s(k * 0.1), 1e6 + 12345.678 * k) << k;
  std::filesystem::remove(path);
}

TEST(Metrics, RmsError) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  EXPECT_EQ(wf::rms_error(t, std::vector<double>(4, 0.0), 0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(wf::rms_error(t, std::vector<double>(4, 7.0), 0.0, 3.0), 7.0);
  EXPECT_DOUBLE_EQ(wf::rms_error(t, std::vector<double>{5.0, -5.0, 5.0, -5.0}, 0.0, 3.0), 5.0);
  EXPECT_DOUBLE_EQ(wf::rms_error(t, std::vector<double>{100.0, 3.0, 4.0, 100.0}, 0.5, 2.5),
                   std::sqrt((9.0 + 16.0) / 2.0));
  EXPECT_THROW(wf::rms_error(t, std::vector<double>(4, 1.0), 10.0, 20.0), wf::ConfigError);
}

TEST(Metrics, Occupancy) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(wf::occupancy(t, std::vector<std::uint8_t>{1, 0, 1, 1}, 1.0), 2.0 / 3.0);
}

TEST(Simulation, DeterministicCsv) {
  const wf::ScenarioConfig c = short_run(12.3, 2, 400.0);
  const std::string a = wf::format_timeseries_csv(wf::run_scenario(c, tables()).series);
  const std::string b = wf::format_timeseries_csv(wf::run_scenario(c, tables()).series);
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4001);
  EXPECT_EQ(a.substr(0, a.find('\n')).find("t,P_dem_1,P_meas_1,F_T_1,theta_1,tau_gen_1,omega_r_1,sat_1,P_dem_2"), 0U);
}

TEST(Simulation, NoisyRunsDependOnlyOnSeed) {
  wf::ScenarioConfig c = short_run(13.0, 2, 350.0);
  c.controller.output_noise_std = 1e3;
  c.controller.input_noise_std = 1e3;
  const std::string a = wf::format_timeseries_csv(wf::run_scenario(c, tables()).series);
  EXPECT_EQ(a, wf::format_timeseries_csv(wf::run_scenario(c, tables()).series));
  c.seed = 2;
  EXPECT_NE(a, wf::format_timeseries_csv(wf::run_scenario(c, tables()).series));
}

TEST(Simulation, EnergyBookkeeping) {
  const wf::ScenarioConfig c = short_run(13.0, 1);
  const auto r = wf::run_scenario(c, tables());
  const auto m = wf::compute_metrics(c, r.series);
  double energy = 0.0;
  for (std::size_t k = 0; k < r.series.ticks(); ++k) {
    double farm = 0.0;
    for (std::size_t i = 0; i < r.series.turbines(); ++i) farm += r.series.power[i][k];
    EXPECT_EQ(farm, r.series.farm_power[k]);
    energy += farm * c.sample_time;
  }
  EXPECT_EQ(m.energy, energy);
}

// Electrical output beyond the aerodynamic supply must come out of rotor kinetic energy.
TEST(Simulation, SupplyBoundedByKineticReserve) {
  for (double inflow : {13.0, 12.2, 11.0}) {
    const wf::ScenarioConfig c = short_run(inflow, 2);
    const auto r = wf::run_scenario(c, tables());
    const auto& p = c.turbine;
    for (std::size_t i = 0; i < r.series.turbines(); ++i) {
      const double w0 = r.series.rotor_speed[i][0];
      const double reserve = 0.5 * p.drivetrain_inertia * w0 * w0;
      double surplus = 0.0;
      for (std::size_t k = 0; k < r.series.ticks(); ++k) {
        const double v = r.series.wind_speed[i][k];
        const double supply = 0.5 * p.air_density * p.swept_area() * v * v * v * tables().max_power_coefficient();
        surplus += (r.series.power[i][k] - supply) * c.sample_time;
        ASSERT_LE(surplus, reserve) << "inflow " << inflow << " turbine " << i << " tick " << k;
      }
    }
  }
}

TEST(Simulation, SupplyCeilingWithTransientAllowance) {
  for (const char* name : {"case1_13ms.yaml", "case2_13ms.yaml", "case1_marginal.yaml", "case2_marginal.yaml",
                           "case1_deep.yaml", "case2_deep.yaml"}) {
    const wf::ScenarioConfig c = wf::load_scenario(std::filesystem::path(WINDFARM_CONFIG_DIR) / name);
    const auto r = wf::run_scenario(c, tables());
    double worst = 0.0;
    for (std::size_t i = 0; i < r.series.turbines(); ++i) {
      for (std::size_t k = 0; k < r.series.ticks(); ++k) {
        const double ceiling = wf::available_power(r.series.wind_speed[i][k], c.turbine, tables());
        worst = std::max(worst, r.series.power[i][k] / ceiling);
      }
    }
    EXPECT_LE(worst, 1.05) << name;
  }
}

TEST(Simulation, UniformDispatchWhenControllersDisabled) {
  wf::ScenarioConfig c = short_run(12.5, 2);
  c.controller.enabled = false;
  const auto r = wf::run_scenario(c, tables());
  const double n = static_cast<double>(r.series.turbines());
  for (std::size_t k = 0; k < r.series.ticks(); ++k) {
    for (std::size_t i = 0; i < r.series.turbines(); ++i) {
      ASSERT_EQ(r.series.demand[i][k], r.series.farm_reference[k] / n);
    }
    ASSERT_EQ(r.series.compensation[k], 0.0);
  }
}

TEST(Simulation, ThrustErrorsSumToZero) {
  const wf::ScenarioConfig c = short_run(12.2, 2);
  const auto r = wf::run_scenario(c, tables());
  for (std::size_t k = 0; k < r.series.ticks(); ++k) ASSERT_LT(std::abs(r.series.balance_residual[k]), 1e-6);
}

TEST(Simulation, WarmStartIsSettled) {
  wf::ScenarioConfig c = short_run(13.0, 2, 300.0);
  c.metrics_window = {0.0, 300.0};
  const auto r = wf::run_scenario(c, tables());
  const auto m = wf::compute_metrics(c, r.series);
  EXPECT_LT(m.rms_error, 1e-3 * 22.5e6);
}

TEST(Simulation, RejectsInvalidConfig) {
  wf::ScenarioConfig c;
  c.sample_time = -1.0;
  EXPECT_THROW(wf::run_scenario(c, tables()), wf::ConfigError);
}

TEST(Compare, IdenticalRunsHaveZeroDeltas) {
  const wf::ScenarioConfig c = short_run(13.0, 2, 400.0);
  const auto m = wf::compute_metrics(c, wf::run_scenario(c, tables()).series);
  const auto cmp = wf::compare_cases(m, m);
  EXPECT_EQ(cmp.rms_ratio, 1.0);
  EXPECT_EQ(cmp.a.row_occupancy, cmp.b.row_occupancy);
  EXPECT_EQ(cmp.a.energy, cmp.b.energy);
}

TEST(Compare, MismatchedScenariosRejected) {
  const wf::ScenarioConfig c = short_run(13.0, 2, 400.0);
  const auto a = wf::compute_metrics(c, wf::run_scenario(c, tables()).series);
  auto b = a;
  b.fingerprint.inflow = 12.0;
  EXPECT_THROW(wf::compare_cases(a, b), wf::ConfigError);
}

TEST(Compare, MetricsFileRoundTrip) {
  const wf::ScenarioConfig c = short_run(12.3, 1, 400.0);
  const auto m = wf::compute_metrics(c, wf::run_scenario(c, tables()).series);
  const auto path = std::filesystem::temp_directory_path() / "windfarm_metrics.yaml";
  wf::write_metrics(m, path);
  const auto back = wf::read_metrics(path);
  EXPECT_EQ(back.rms_error, m.rms_error);
  EXPECT_EQ(back.occupancy, m.occupancy);
  EXPECT_EQ(back.fingerprint, m.fingerprint);
  EXPECT_EQ(back.energy, m.energy);
  std::filesystem::remove(path);
}
