#include "windfarm/turbine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "windfarm/errors.hpp"

namespace windfarm {
namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ConfigError(fmt::format("turbine: {} must be positive, got {}", name, value));
  }
}

double aero_power(double wind_speed, double tip_speed_ratio, double pitch, const TurbineParams& params,
                  const AeroTables& tables) {
  if (wind_speed <= 0.0) return 0.0;
  const double cp = tables.power_coefficient(tip_speed_ratio, pitch).value;
  return 0.5 * params.air_density * params.swept_area() * wind_speed * wind_speed * wind_speed * cp;
}

double gain_schedule(double pitch, const TurbineParams& params) {
  return params.pitch_gain_scheduling ? 1.0 / (1.0 + pitch / params.pitch_schedule_angle) : 1.0;
}

template <typename F>
double bisect(F&& f, double lo, double hi, int iterations = 100) {
  double f_lo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void TurbineParams::validate() const {
  require_positive(rated_power, "rated_power");
  require_positive(rotor_radius, "rotor_radius");
  require_positive(air_density, "air_density");
  require_positive(gearbox_ratio, "gearbox_ratio");
  require_positive(generator_efficiency, "generator_efficiency");
  if (generator_efficiency > 1.0) throw ConfigError("turbine: generator_efficiency must be <= 1");
  require_positive(rated_generator_speed, "rated_generator_speed");
  require_positive(drivetrain_inertia, "drivetrain_inertia");
  require_positive(greedy_gain, "greedy_gain");
  require_positive(cut_in_generator_speed, "cut_in_generator_speed");
  require_positive(region25_slip_percent, "region25_slip_percent");
  require_positive(torque_max, "torque_max");
  require_positive(torque_rate_limit, "torque_rate_limit");
  require_positive(pitch_rate_limit, "pitch_rate_limit");
  require_positive(pitch_kp, "pitch_kp");
  require_positive(pitch_ki, "pitch_ki");
  require_positive(pitch_schedule_angle, "pitch_schedule_angle");
  require_positive(speed_floor_fraction, "speed_floor_fraction");
  if (!(cut_in_generator_speed < region2_generator_speed && region2_generator_speed < region3_generator_speed)) {
    throw ConfigError("turbine: torque schedule breakpoints must be increasing");
  }
  if (!(pitch_max > pitch_min) || !std::isfinite(pitch_min)) {
    throw ConfigError("turbine: pitch_max must exceed pitch_min");
  }
  if (!std::isfinite(saturation_hysteresis_fraction) || saturation_hysteresis_fraction < 0.0) {
    throw ConfigError("turbine: saturation_hysteresis_fraction must be non-negative");
  }
}

TorqueCommand tracking_torque(double demand, double generator_speed, double efficiency,
                              const TurbineParams& params) {
  if (generator_speed <= params.speed_floor()) return {params.torque_max, true};
  return {demand / (generator_speed * efficiency), false};
}

double greedy_torque(double generator_speed, const TurbineParams& p) {
  const double w = generator_speed;
  const double k = p.greedy_gain;
  const double rated_mech_power = p.rated_power / p.generator_efficiency;
  const double sync_speed = p.region3_generator_speed / (1.0 + 0.01 * p.region25_slip_percent);
  const double slope15 =
      k * p.region2_generator_speed * p.region2_generator_speed / (p.region2_generator_speed - p.cut_in_generator_speed);
  const double slope25 = (rated_mech_power / p.region3_generator_speed) / (p.region3_generator_speed - sync_speed);
  // Where the K w^2 curve meets the region 2.5 line.
  const double transition = (slope25 - std::sqrt(slope25 * (slope25 - 4.0 * k * sync_speed))) / (2.0 * k);

  double torque = 0.0;
  if (w >= p.region3_generator_speed) {
    torque = rated_mech_power / w;
  } else if (w <= p.cut_in_generator_speed) {
    torque = 0.0;
  } else if (w < p.region2_generator_speed) {
    torque = slope15 * (w - p.cut_in_generator_speed);
  } else if (w < transition) {
    torque = k * w * w;
  } else {
    torque = slope25 * (w - sync_speed);
  }
  return std::clamp(torque, 0.0, p.torque_max);
}

double rate_limited_torque(double previous, double command, double dt, const TurbineParams& params) {
  const double max_step = params.torque_rate_limit * dt;
  const double limited = std::clamp(command, previous - max_step, previous + max_step);
  return std::clamp(limited, 0.0, params.torque_max);
}

bool saturation_flag(double demand, double greedy_power, double hysteresis, bool previously_saturated) {
  if (previously_saturated) return !(demand < greedy_power - hysteresis);
  return demand > greedy_power + hysteresis;
}

ThrustResult thrust_force(double wind_speed, double tip_speed_ratio, double pitch, const TurbineParams& params,
                          const AeroTables& tables) {
  if (wind_speed <= 0.0) return {};
  const CoefficientLookup ct = tables.thrust_coefficient(tip_speed_ratio, pitch);
  return {0.5 * params.air_density * params.swept_area() * wind_speed * wind_speed * ct.value, ct.extrapolated};
}

double available_power(double wind_speed, const TurbineParams& params, const AeroTables& tables) {
  if (wind_speed <= 0.0) return 0.0;
  const double ideal = 0.5 * params.air_density * params.swept_area() * wind_speed * wind_speed * wind_speed *
                       tables.max_power_coefficient();
  return std::min(ideal, params.rated_power);
}

double pitch_integral_for(double pitch, const TurbineParams& params) {
  return pitch / (gain_schedule(pitch, params) * params.pitch_ki);
}

double pitch_step(double generator_speed, double dt, TurbineState& state, const TurbineParams& params) {
  const double speed_error = (generator_speed - params.rated_generator_speed) / params.gearbox_ratio;
  const double gain = gain_schedule(state.pitch, params);

  const double integral_scale = gain * params.pitch_ki;
  state.pitch_integral = std::clamp(state.pitch_integral + speed_error * dt, params.pitch_min / integral_scale,
                                    params.pitch_max / integral_scale);

  double command = gain * (params.pitch_kp * speed_error + params.pitch_ki * state.pitch_integral);
  command = std::clamp(command, params.pitch_min, params.pitch_max);
  const double max_step = params.pitch_rate_limit * dt;
  command = std::clamp(command, state.pitch - max_step, state.pitch + max_step);
  return std::clamp(command, params.pitch_min, params.pitch_max);
}

TurbineState rotor_step(double wind_speed, double generator_torque, double dt, TurbineState state,
                        const TurbineParams& params, const AeroTables& tables) {
  const double floor = params.speed_floor() / params.gearbox_ratio;
  state.near_stall = false;
  double omega = state.rotor_speed;
  if (omega < floor) {
    omega = floor;
    state.near_stall = true;
  }

  double aero_torque = 0.0;
  if (wind_speed > 0.0) {
    const double tsr = omega * params.rotor_radius / wind_speed;
    aero_torque = aero_power(wind_speed, tsr, state.pitch, params, tables) / omega;
  }
  omega += dt * (aero_torque - params.gearbox_ratio * generator_torque) / params.drivetrain_inertia;
  if (omega < floor) {
    omega = floor;
    state.near_stall = true;
  }

  state.rotor_speed = omega;
  state.generator_torque = generator_torque;
  state.tip_speed_ratio = wind_speed > 0.0 ? omega * params.rotor_radius / wind_speed : 0.0;
  const ThrustResult thrust = thrust_force(wind_speed, state.tip_speed_ratio, state.pitch, params, tables);
  state.thrust = thrust.force;
  state.table_extrapolated = thrust.extrapolated;
  state.measured_power = generator_torque * state.generator_speed(params) * params.generator_efficiency;
  if (!std::isfinite(state.rotor_speed) || !std::isfinite(state.thrust)) {
    throw NumericalError("turbine: non-finite rotor state");
  }
  return state;
}

Turbine::Turbine(TurbineParams params, const AeroTables& tables) : params_(params), tables_(&tables) {
  params_.validate();
}

void Turbine::initialize_steady(double wind_speed, double demand) {
  const TurbineParams& p = params_;
  const AeroTables& tables = *tables_;
  const double efficiency = p.generator_efficiency;
  const double rated_omega = p.rated_rotor_speed();
  const double mech_demand = std::max(demand, 0.0) / efficiency;
  auto power_at = [&](double omega, double pitch) {
    return aero_power(wind_speed, omega * p.rotor_radius / wind_speed, pitch, p, tables);
  };

  TurbineState s;
  s.pitch = p.pitch_min;
  if (wind_speed <= 0.0) {
    s.rotor_speed = p.speed_floor() / p.gearbox_ratio;
  } else if (power_at(rated_omega, p.pitch_min) >= mech_demand) {
    // Speed held at rated by pitch; find the regulating pitch.
    s.rotor_speed = rated_omega;
    const double hi = p.pitch_max;
    s.pitch = power_at(rated_omega, hi) >= mech_demand
                  ? hi
                  : bisect([&](double pitch) { return power_at(rated_omega, pitch) - mech_demand; }, p.pitch_min, hi);
  } else {
    // Greedy equilibrium at fine pitch: aerodynamic torque balances the schedule.
    auto imbalance = [&](double omega) {
      return power_at(omega, p.pitch_min) / omega - p.gearbox_ratio * greedy_torque(omega * p.gearbox_ratio, p);
    };
    const double lo = 1.01 * p.speed_floor() / p.gearbox_ratio;
    const double greedy_omega = imbalance(rated_omega) > 0.0 ? rated_omega : bisect(imbalance, lo, rated_omega);
    const double greedy_power = power_at(greedy_omega, p.pitch_min);
    if (greedy_power >= mech_demand) {
      // Demand sits between the greedy point and rated speed: over-speed operation.
      s.rotor_speed = bisect([&](double omega) { return power_at(omega, p.pitch_min) - mech_demand; }, greedy_omega,
                             rated_omega);
    } else {
      s.rotor_speed = greedy_omega;
      s.saturated = true;
    }
  }

  const double generator_speed = s.rotor_speed * p.gearbox_ratio;
  s.generator_torque = s.saturated ? greedy_torque(generator_speed, p)
                                   : std::min(mech_demand / generator_speed, p.torque_max);
  s.pitch_integral = pitch_integral_for(s.pitch, p);
  s.tip_speed_ratio = wind_speed > 0.0 ? s.rotor_speed * p.rotor_radius / wind_speed : 0.0;
  const ThrustResult thrust = thrust_force(wind_speed, s.tip_speed_ratio, s.pitch, p, tables);
  s.thrust = thrust.force;
  s.table_extrapolated = thrust.extrapolated;
  s.measured_power = s.generator_torque * generator_speed * efficiency;
  state_ = s;
}

const TurbineState& Turbine::step(double demand, double wind_speed, double dt) {
  const double generator_speed = state_.generator_speed(params_);
  const double efficiency = params_.generator_efficiency;
  const double greedy = greedy_torque(generator_speed, params_);
  const TorqueCommand tracking = tracking_torque(demand, generator_speed, efficiency, params_);

  state_.saturated =
      saturation_flag(demand, greedy * generator_speed * efficiency, params_.saturation_hysteresis(), state_.saturated);
  state_.speed_floor_hit = tracking.speed_floor_hit;

  const double torque =
      rate_limited_torque(state_.generator_torque, combined_torque(greedy, tracking.torque), dt, params_);
  state_.pitch = pitch_step(generator_speed, dt, state_, params_);
  state_ = rotor_step(wind_speed, torque, dt, state_, params_, *tables_);
  return state_;
}

double Turbine::greedy_power() const {
  const double generator_speed = state_.generator_speed(params_);
  return greedy_torque(generator_speed, params_) * generator_speed * params_.generator_efficiency;
}

double Turbine::thrust_coefficient() const {
  return tables_->thrust_coefficient(state_.tip_speed_ratio, state_.pitch).value;
}

}  // namespace windfarm
