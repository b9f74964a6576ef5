#pragma once

#include <numbers>

#include "windfarm/aero_tables.hpp"

namespace windfarm {

/**
 * Single-turbine parameters. Defaults describe the 5 MW offshore reference
 * machine (63 m rotor, 97:1 gearbox) with its baseline variable-speed torque
 * schedule and the retuned pitch PI gains.
 *
 * Torques are generator (high-speed shaft) side. Pitch PI gains act on the
 * rotor-speed error, i.e. the generator-speed error divided by the gearbox
 * ratio.
 */
struct TurbineParams {
  double rated_power = 5.0e6;                 // W, electrical
  double rotor_radius = 63.0;                 // m
  double air_density = 1.225;                 // kg/m^3
  double gearbox_ratio = 97.0;
  double generator_efficiency = 0.944;
  double rated_generator_speed = 122.9096;    // rad/s
  double drivetrain_inertia = 38759236.0 + 115926.0 + 534.116 * 97.0 * 97.0;  // kg m^2, rotor side

  // Generator torque schedule.
  double greedy_gain = 2.332287;              // N m s^2 / rad^2
  double cut_in_generator_speed = 70.16224;   // rad/s, region 1 -> 1.5
  double region2_generator_speed = 91.21091;  // rad/s, region 1.5 -> 2
  double region3_generator_speed = 121.6805;  // rad/s, region 2.5 -> 3
  double region25_slip_percent = 10.0;
  double torque_max = 47402.91;               // N m
  double torque_rate_limit = 15000.0;         // N m / s

  // Pitch actuator and speed regulator.
  double pitch_min = 0.0;                     // rad
  double pitch_max = std::numbers::pi / 2.0;  // rad
  double pitch_rate_limit = 0.1396263;        // rad/s
  double pitch_kp = 1.82620057;               // s
  double pitch_ki = 0.19566438;
  double pitch_schedule_angle = 0.1099965;    // rad; gain halves at this pitch
  bool pitch_gain_scheduling = true;

  /// Tracking torque guard, as a fraction of rated generator speed.
  double speed_floor_fraction = 0.1;
  /// Saturation detector hysteresis band as a fraction of rated power.
  double saturation_hysteresis_fraction = 0.02;

  [[nodiscard]] double swept_area() const noexcept {
    return std::numbers::pi * rotor_radius * rotor_radius;
  }
  [[nodiscard]] double speed_floor() const noexcept {
    return speed_floor_fraction * rated_generator_speed;
  }
  [[nodiscard]] double saturation_hysteresis() const noexcept {
    return saturation_hysteresis_fraction * rated_power;
  }
  [[nodiscard]] double rated_rotor_speed() const noexcept {
    return rated_generator_speed / gearbox_ratio;
  }

  /// Throws ConfigError on non-physical values.
  void validate() const;
};

struct TurbineState {
  double rotor_speed = 0.0;        // rad/s
  double pitch = 0.0;              // rad
  double generator_torque = 0.0;   // N m, as applied after rate limiting
  double measured_power = 0.0;     // W
  double thrust = 0.0;             // N
  double tip_speed_ratio = 0.0;
  double pitch_integral = 0.0;     // integrated rotor-speed error, rad
  bool saturated = false;
  bool near_stall = false;
  bool speed_floor_hit = false;
  bool table_extrapolated = false;

  [[nodiscard]] double generator_speed(const TurbineParams& params) const noexcept {
    return rotor_speed * params.gearbox_ratio;
  }
};

struct TorqueCommand {
  double torque = 0.0;
  /// Generator speed was at or below the floor; torque clamped to torque_max.
  bool speed_floor_hit = false;
};

struct ThrustResult {
  double force = 0.0;
  bool extrapolated = false;
};

/// Torque that converts `demand` watts at the current generator speed.
TorqueCommand tracking_torque(double demand, double generator_speed, double efficiency,
                              const TurbineParams& params);

/// Variable-speed schedule: cut-in ramp, K w^2, region 2.5 ramp, constant power.
double greedy_torque(double generator_speed, const TurbineParams& params);

constexpr double combined_torque(double greedy, double tracking) noexcept {
  return greedy < tracking ? greedy : tracking;
}

/// Clamps the step change from `previous` to torque_rate_limit * dt, and to [0, torque_max].
double rate_limited_torque(double previous, double command, double dt, const TurbineParams& params);

/// Saturation detector with hysteresis. Returns true while saturated.
bool saturation_flag(double demand, double greedy_power, double hysteresis, bool previously_saturated);

ThrustResult thrust_force(double wind_speed, double tip_speed_ratio, double pitch,
                          const TurbineParams& params, const AeroTables& tables);

/// min(1/2 rho A v^3 C_P^max, rated_power).
double available_power(double wind_speed, const TurbineParams& params, const AeroTables& tables);

/// Integrator value that makes the PI output equal `pitch` at zero speed error.
double pitch_integral_for(double pitch, const TurbineParams& params);

/**
 * One PI update of the collective pitch speed regulator. Updates
 * state.pitch_integral and returns the new pitch, limited in position and
 * rate. The integrator is clamped so the integral term alone stays within the
 * pitch limits.
 */
double pitch_step(double generator_speed, double dt, TurbineState& state, const TurbineParams& params);

/**
 * Forward-Euler rotor update J dw/dt = tau_aero - N tau_gen with the given
 * generator torque and pitch already in `state`. Refreshes tip-speed ratio,
 * thrust and measured power from the new rotor speed.
 */
TurbineState rotor_step(double wind_speed, double generator_torque, double dt, TurbineState state,
                        const TurbineParams& params, const AeroTables& tables);

/**
 * Closed-loop turbine: min-law torque controller, pitch speed regulator and
 * rotor. A turbine owns its state; stepping distinct turbines is independent.
 */
class Turbine {
 public:
  Turbine(TurbineParams params, const AeroTables& tables);

  /// Settles the turbine at the operating point for `wind_speed` and `demand`:
  /// rated speed with regulating pitch when demand is below what the wind
  /// supports, otherwise the greedy equilibrium.
  void initialize_steady(double wind_speed, double demand);

  /// Advances one sample with the set point dispatched on the previous tick.
  const TurbineState& step(double demand, double wind_speed, double dt);

  [[nodiscard]] const TurbineState& state() const noexcept { return state_; }
  [[nodiscard]] TurbineState& mutable_state() noexcept { return state_; }
  [[nodiscard]] const TurbineParams& params() const noexcept { return params_; }
  [[nodiscard]] const AeroTables& tables() const noexcept { return *tables_; }

  /// Electrical power of the greedy schedule at the current generator speed.
  [[nodiscard]] double greedy_power() const;
  /// C_T at the current tip-speed ratio and pitch.
  [[nodiscard]] double thrust_coefficient() const;

 private:
  TurbineParams params_;
  const AeroTables* tables_;
  TurbineState state_;
};

}  // namespace windfarm
