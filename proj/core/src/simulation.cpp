#include "windfarm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include <fmt/format.h>

#include "windfarm/errors.hpp"
#include "windfarm/farm_control.hpp"
#include "windfarm/reference_signal.hpp"
#include "windfarm/turbine.hpp"
#include "windfarm/wake_field.hpp"

namespace windfarm {
namespace {

constexpr int kWakeIterations = 100;

bool finite_state(const TurbineState& s) {
  return std::isfinite(s.rotor_speed) && std::isfinite(s.pitch) && std::isfinite(s.generator_torque) &&
         std::isfinite(s.measured_power) && std::isfinite(s.thrust);
}

// Settles every turbine at `demand` and iterates the static wake to a fixed point.
std::vector<double> settle_farm(std::vector<Turbine>& turbines, const WakeField& probe, double demand) {
  const std::size_t n = turbines.size();
  std::vector<double> speeds(n, probe.ambient_speed());
  std::vector<double> ct(n);
  for (int it = 0; it < kWakeIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      turbines[i].initialize_steady(speeds[i], demand);
      ct[i] = turbines[i].thrust_coefficient();
    }
    const std::vector<double> next = probe.steady_speeds(ct);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - speeds[i]));
    speeds = next;
    if (change < 1e-12) break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    turbines[i].initialize_steady(speeds[i], demand);
    ct[i] = turbines[i].thrust_coefficient();
  }
  return ct;
}

}  // namespace

void TimeSeries::reserve(std::size_t turbine_count, std::size_t tick_count) {
  for (auto* v : {&time, &farm_reference, &farm_power, &compensation, &balance_residual}) v->reserve(tick_count);
  engaged.reserve(tick_count);
  for (auto* m : {&demand, &power, &thrust, &pitch, &torque, &rotor_speed, &wind_speed}) {
    m->assign(turbine_count, {});
    for (auto& v : *m) v.reserve(tick_count);
  }
  saturated.assign(turbine_count, {});
  for (auto& v : saturated) v.reserve(tick_count);
}

AeroTables scenario_tables(const ScenarioConfig& config) {
  return config.aero_table_file ? AeroTables::load(*config.aero_table_file) : AeroTables::generate_default();
}

SimulationResult run_scenario(const ScenarioConfig& config) { return run_scenario(config, scenario_tables(config)); }

SimulationResult run_scenario(const ScenarioConfig& config, const AeroTables& tables) {
  config.validate();
  const std::size_t n = config.turbine_count();
  const std::size_t steps = config.step_count();
  const double dt = config.sample_time;
  const double rated = config.turbine.rated_power;

  const ReferenceSignal signal(config.signal, config.farm_rated_power(), config.duration);
  std::vector<Turbine> turbines(n, Turbine(config.turbine, tables));

  const std::vector<double> ambient_ct(n, 0.0);
  const WakeField probe(config.layout, config.inflow, config.wake_expansion, dt, ambient_ct);
  const double initial_share = std::clamp(signal(0.0) / static_cast<double>(n), 0.0, rated);
  std::vector<double> ct = settle_farm(turbines, probe, initial_share);
  WakeField wake(config.layout, config.inflow, config.wake_expansion, dt, ct);

  FarmController controller(config.farm_control_config());
  const std::vector<double> rated_power(n, rated);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> input_noise(0.0, config.controller.input_noise_std);
  std::normal_distribution<double> output_noise(0.0, config.controller.output_noise_std);
  const bool noisy_input = config.controller.input_noise_std > 0.0;
  const bool noisy_output = config.controller.output_noise_std > 0.0;

  SimulationResult result;
  TimeSeries& ts = result.series;
  ts.reserve(n, steps);

  std::vector<double> measured_power(n);
  std::vector<double> measured_thrust(n);
  std::vector<std::uint8_t> mask(n);
  std::vector<double> reference(n);
  std::vector<double> demand(n);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t i = 0; i < n; ++i) ct[i] = turbines[i].thrust_coefficient();
    const std::span<const double> speeds = wake.advance(ct);

    double farm_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const TurbineState& s = turbines[i].state();
      measured_power[i] = s.measured_power;
      measured_thrust[i] = s.thrust + (noisy_output ? output_noise(rng) : 0.0);
      mask[i] = s.saturated ? 0 : 1;
      farm_power += s.measured_power;
    }

    const double farm_reference = signal(t);
    std::fill(reference.begin(), reference.end(), farm_reference / static_cast<double>(n));
    const bool engaged = signal.engaged(t) && config.controller.enabled;
    double residual = 0.0;
    if (engaged) {
      const Dispatch d = controller.step(reference, measured_power, measured_thrust, mask, rated_power);
      demand = d.demand;
      for (double e : d.thrust_error) residual += e;
    } else {
      for (std::size_t i = 0; i < n; ++i) demand[i] = std::clamp(reference[i], 0.0, rated);
    }

    ts.time.push_back(t);
    ts.farm_reference.push_back(farm_reference);
    ts.farm_power.push_back(farm_power);
    ts.compensation.push_back(controller.state().compensation);
    ts.balance_residual.push_back(residual);
    ts.engaged.push_back(engaged ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      const TurbineState& s = turbines[i].state();
      ts.demand[i].push_back(demand[i]);
      ts.power[i].push_back(s.measured_power);
      ts.thrust[i].push_back(s.thrust);
      ts.pitch[i].push_back(s.pitch);
      ts.torque[i].push_back(s.generator_torque);
      ts.rotor_speed[i].push_back(s.rotor_speed);
      ts.wind_speed[i].push_back(speeds[i]);
      ts.saturated[i].push_back(s.saturated ? 1 : 0);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double command = demand[i] + (noisy_input ? input_noise(rng) : 0.0);
      const TurbineState& s = turbines[i].step(command, speeds[i], dt);
      if (!finite_state(s)) {
        throw NumericalError(fmt::format("simulation: turbine {} state became non-finite at t = {}", i, t));
      }
      result.speed_floor_events += s.speed_floor_hit ? 1 : 0;
      result.near_stall_events += s.near_stall ? 1 : 0;
      result.table_extrapolated = result.table_extrapolated || s.table_extrapolated;
    }
    result.wake_clamped = result.wake_clamped || wake.clamped();
  }
  return result;
}

std::string format_timeseries_csv(const TimeSeries& series) {
  const std::size_t n = series.turbines();
  fmt::memory_buffer out;
  auto it = std::back_inserter(out);
  fmt::format_to(it, "t");
  for (std::size_t i = 0; i < n; ++i) {
    fmt::format_to(it, ",P_dem_{0},P_meas_{0},F_T_{0},theta_{0},tau_gen_{0},omega_r_{0},sat_{0}", i + 1);
  }
  fmt::format_to(it, ",P_ref_WF,P_meas_WF,u_P\n");
  for (std::size_t k = 0; k < series.ticks(); ++k) {
    fmt::format_to(it, "{}", series.time[k]);
    for (std::size_t i = 0; i < n; ++i) {
      fmt::format_to(it, ",{},{},{},{},{},{},{}", series.demand[i][k], series.power[i][k], series.thrust[i][k],
                     series.pitch[i][k], series.torque[i][k], series.rotor_speed[i][k],
                     static_cast<int>(series.saturated[i][k]));
    }
    fmt::format_to(it, ",{},{},{}\n", series.farm_reference[k], series.farm_power[k], series.compensation[k]);
  }
  return fmt::to_string(out);
}

void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  const std::string text = format_timeseries_csv(series);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace windfarm
