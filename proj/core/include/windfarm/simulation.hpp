#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "windfarm/aero_tables.hpp"
#include "windfarm/scenario_config.hpp"

namespace windfarm {

/// Per-tick record of a farm run. Per-turbine series are indexed [turbine][tick].
struct TimeSeries {
  std::vector<double> time;
  std::vector<double> farm_reference;    ///< P_ref_WF [W]
  std::vector<double> farm_power;        ///< sum of P_meas [W]
  std::vector<double> compensation;      ///< u_P [W]
  std::vector<double> balance_residual;  ///< sum of e_T over unsaturated turbines [N]
  std::vector<std::uint8_t> engaged;

  std::vector<std::vector<double>> demand;
  std::vector<std::vector<double>> power;
  std::vector<std::vector<double>> thrust;
  std::vector<std::vector<double>> pitch;
  std::vector<std::vector<double>> torque;
  std::vector<std::vector<double>> rotor_speed;
  std::vector<std::vector<double>> wind_speed;
  std::vector<std::vector<std::uint8_t>> saturated;

  [[nodiscard]] std::size_t ticks() const noexcept { return time.size(); }
  [[nodiscard]] std::size_t turbines() const noexcept { return demand.size(); }
  void reserve(std::size_t turbines, std::size_t ticks);
};

struct SimulationResult {
  TimeSeries series;
  std::size_t speed_floor_events = 0;
  std::size_t near_stall_events = 0;
  bool table_extrapolated = false;
  bool wake_clamped = false;
};

/// Aerodynamic tables named by the scenario, or the built-in ones.
AeroTables scenario_tables(const ScenarioConfig& config);

/**
 * Runs the farm for config.duration. Turbines start settled at the derated
 * reference with a converged static wake. Each tick: advance the wake with
 * the current C_T, measure, dispatch (farm controller once engaged, equal
 * shares before), then step every turbine with the new set points.
 * Throws NumericalError on non-finite state.
 */
SimulationResult run_scenario(const ScenarioConfig& config);
SimulationResult run_scenario(const ScenarioConfig& config, const AeroTables& tables);

/// Columns t, then per turbine P_dem_i, P_meas_i, F_T_i, theta_i, tau_gen_i,
/// omega_r_i, sat_i, then P_ref_WF, P_meas_WF, u_P. Shortest round-trip decimals.
void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path);
std::string format_timeseries_csv(const TimeSeries& series);

}  // namespace windfarm
