#include "windfarm/farm_control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "windfarm/errors.hpp"

namespace windfarm {
namespace {

constexpr double kDefaultTclGain = 0.5;

void require_size(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    throw ConfigError(fmt::format("farm control: {} has {} entries, expected {}", what, actual, expected));
  }
}

}  // namespace

double FarmControlConfig::effective_ccl_gain() const {
  if (ccl_gain) return *ccl_gain;
  return 1.0 / (sample_time * static_cast<double>(turbine_count));
}

std::vector<double> FarmControlConfig::effective_tcl_gains() const {
  if (tcl_gains.empty()) return std::vector<double>(turbine_count, kDefaultTclGain);
  if (tcl_gains.size() == 1) return std::vector<double>(turbine_count, tcl_gains.front());
  return tcl_gains;
}

void FarmControlConfig::validate() const {
  if (turbine_count == 0) throw ConfigError("farm control: turbine_count must be at least 1");
  if (!(sample_time > 0.0)) throw ConfigError("farm control: sample_time must be positive");
  if (ccl_gain && !(*ccl_gain >= 0.0 && std::isfinite(*ccl_gain))) {
    throw ConfigError("farm control: ccl_gain must be non-negative");
  }
  const auto gains = effective_tcl_gains();
  require_size(gains.size(), turbine_count, "tcl_gains");
  for (double g : gains) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("farm control: tcl gains must be positive");
  }
}

double total_error(double farm_reference, std::span<const double> measured_power) {
  return farm_reference - std::accumulate(measured_power.begin(), measured_power.end(), 0.0);
}

std::optional<double> mean_thrust(std::span<const double> thrust, std::span<const std::uint8_t> mask) {
  require_size(mask.size(), thrust.size(), "mask");
  double sum = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < thrust.size(); ++i) {
    if (mask[i] != 0) {
      sum += thrust[i];
      ++active;
    }
  }
  if (active == 0) return std::nullopt;
  return sum / static_cast<double>(active);
}

std::vector<double> thrust_error(std::span<const double> thrust, std::span<const std::uint8_t> mask) {
  const std::optional<double> mean = mean_thrust(thrust, mask);
  if (!mean) return {};
  std::vector<double> error(thrust.size(), 0.0);
  for (std::size_t i = 0; i < thrust.size(); ++i) {
    if (mask[i] != 0) error[i] = *mean - thrust[i];
  }
  return error;
}

std::vector<double> uniform_dispatch(double farm_reference, std::size_t turbine_count) {
  return std::vector<double>(turbine_count, farm_reference / static_cast<double>(turbine_count));
}

ComposedSetpoints compose_setpoints(std::span<const double> reference, std::span<const double> compensation,
                                    std::span<const double> balancing, std::span<const double> rated_power) {
  const std::size_t n = reference.size();
  require_size(compensation.size(), n, "compensation");
  require_size(balancing.size(), n, "balancing");
  require_size(rated_power.size(), n, "rated_power");
  ComposedSetpoints out{std::vector<double>(n), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = reference[i] + compensation[i] + balancing[i];
    out.demand[i] = std::clamp(raw, 0.0, rated_power[i]);
    out.clamped[i] = out.demand[i] != raw ? 1 : 0;
  }
  return out;
}

FarmController::FarmController(FarmControlConfig config) : config_(std::move(config)) {
  config_.validate();
  ccl_gain_ = config_.effective_ccl_gain();
  tcl_gains_ = config_.effective_tcl_gains();
  state_.thrust_integral.assign(config_.turbine_count, 0.0);
  state_.mask.assign(config_.turbine_count, 1);
  state_.demand.assign(config_.turbine_count, 0.0);
}

std::vector<double> FarmController::compensation_output(std::span<const std::uint8_t> mask) const {
  std::vector<double> out(config_.turbine_count, 0.0);
  if (!config_.ccl_enabled) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool receives = config_.distribution == CompensationDistribution::kBroadcast || mask[i] != 0;
    out[i] = receives ? state_.compensation : 0.0;
  }
  return out;
}

std::vector<double> FarmController::balancing_output() const {
  std::vector<double> out(config_.turbine_count, 0.0);
  if (!config_.tcl_enabled) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = tcl_gains_[i] * state_.thrust_integral[i];
  return out;
}

std::vector<double> FarmController::ccl_step(double error, std::span<const std::uint8_t> mask) {
  require_size(mask.size(), config_.turbine_count, "mask");
  const bool any_unsaturated = std::any_of(mask.begin(), mask.end(), [](std::uint8_t s) { return s != 0; });
  // Unwinding (negative error) is always allowed.
  const bool hold = config_.anti_windup == AntiWindup::kAllSaturated && !any_unsaturated && error > 0.0;
  if (config_.ccl_enabled && !hold) state_.compensation += ccl_gain_ * error * config_.sample_time;
  return compensation_output(mask);
}

std::vector<double> FarmController::tcl_step(std::span<const double> thrust_error) {
  if (config_.tcl_enabled && !thrust_error.empty()) {
    require_size(thrust_error.size(), config_.turbine_count, "thrust_error");
    for (std::size_t i = 0; i < thrust_error.size(); ++i) {
      state_.thrust_integral[i] += thrust_error[i] * config_.sample_time;
    }
  }
  return balancing_output();
}

Dispatch FarmController::step(std::span<const double> reference, std::span<const double> measured_power,
                              std::span<const double> measured_thrust, std::span<const std::uint8_t> mask,
                              std::span<const double> rated_power) {
  const std::size_t n = config_.turbine_count;
  require_size(reference.size(), n, "reference");
  require_size(measured_power.size(), n, "measured_power");
  require_size(measured_thrust.size(), n, "measured_thrust");
  require_size(mask.size(), n, "mask");

  Dispatch out;
  const double farm_reference = std::accumulate(reference.begin(), reference.end(), 0.0);
  out.total_error = total_error(farm_reference, measured_power);
  out.compensation = ccl_step(out.total_error, mask);

  out.thrust_error = thrust_error(measured_thrust, mask);
  out.balancing_skipped = out.thrust_error.empty();
  if (out.balancing_skipped) out.thrust_error.assign(n, 0.0);
  out.balancing = out.balancing_skipped ? balancing_output() : tcl_step(out.thrust_error);

  ComposedSetpoints composed = compose_setpoints(reference, out.compensation, out.balancing, rated_power);
  out.demand = std::move(composed.demand);
  out.clamped = std::move(composed.clamped);

  state_.mask.assign(mask.begin(), mask.end());
  state_.demand = out.demand;
  return out;
}

}  // namespace windfarm
