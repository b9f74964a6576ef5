#include "windfarm/wake_field.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "windfarm/errors.hpp"

namespace windfarm {
namespace {

constexpr double kMaxThrustCoefficient = 0.9999;

bool is_waked(const Position& up, const Position& down, double rotor_diameter, double expansion) {
  const double dx = down.x - up.x;
  if (dx <= 0.0) return false;
  const double wake_radius = 0.5 * rotor_diameter + expansion * dx;
  return std::abs(down.y - up.y) < wake_radius;
}

}  // namespace

FarmLayout FarmLayout::grid(std::size_t rows, std::size_t columns, double spacing_diameters, double rotor_diameter) {
  FarmLayout layout;
  layout.rows = rows;
  layout.columns = columns;
  layout.rotor_diameter = rotor_diameter;
  const double spacing = spacing_diameters * rotor_diameter;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns; ++c) {
      layout.positions.push_back({static_cast<double>(r) * spacing, static_cast<double>(c) * spacing});
    }
  }
  return layout;
}

void FarmLayout::validate() const {
  if (positions.empty()) throw ConfigError("layout: no turbines");
  if (!(rotor_diameter > 0.0)) throw ConfigError("layout: rotor_diameter must be positive");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (positions[i].x == positions[j].x && positions[i].y == positions[j].y) {
        throw ConfigError(fmt::format("layout: turbines {} and {} share a position", i, j));
      }
    }
  }
}

DeficitResult wake_deficit(double thrust_coefficient, double distance, double rotor_diameter, double expansion) {
  DeficitResult result;
  double ct = std::max(thrust_coefficient, 0.0);
  if (ct >= 1.0) {
    ct = kMaxThrustCoefficient;
    result.clamped = true;
  }
  if (!(distance > 0.0) || ct == 0.0) return result;
  const double spread = 1.0 + expansion * distance / rotor_diameter;
  result.value = (1.0 - std::sqrt(1.0 - ct)) / (spread * spread);
  return result;
}

WakeField::WakeField(FarmLayout layout, double ambient_speed, double expansion, double dt,
                     std::span<const double> initial_thrust_coefficients)
    : layout_(std::move(layout)), ambient_(ambient_speed), expansion_(expansion) {
  layout_.validate();
  if (!(ambient_speed > 0.0)) throw ConfigError("wake: ambient speed must be positive");
  if (!(expansion >= 0.0)) throw ConfigError("wake: expansion coefficient must be non-negative");
  if (!(dt > 0.0)) throw ConfigError("wake: time step must be positive");
  const std::size_t n = layout_.size();
  if (initial_thrust_coefficients.size() != n) {
    throw ConfigError("wake: initial thrust coefficient count does not match layout");
  }

  std::size_t max_delay = 0;
  for (std::size_t down = 0; down < n; ++down) {
    for (std::size_t up = 0; up < n; ++up) {
      const Position& a = layout_.positions[up];
      const Position& b = layout_.positions[down];
      if (!is_waked(a, b, layout_.rotor_diameter, expansion_)) continue;
      const double distance = b.x - a.x;
      // Advection at the mean of ambient and nominal waked speed.
      const double deficit =
          wake_deficit(initial_thrust_coefficients[up], distance, layout_.rotor_diameter, expansion_).value;
      const double advection = ambient_ * (1.0 - 0.5 * deficit);
      const auto delay = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(distance / advection / dt)));
      interactions_.push_back({up, down, distance, delay});
      max_delay = std::max(max_delay, delay);
    }
  }

  capacity_ = max_delay + 1;
  history_.resize(n);
  for (std::size_t i = 0; i < n; ++i) history_[i].assign(capacity_, initial_thrust_coefficients[i]);
  speeds_ = steady_speeds(initial_thrust_coefficients);
}

double WakeField::delayed_thrust_coefficient(std::size_t turbine, std::size_t lag) const {
  return history_[turbine][(head_ + capacity_ - lag) % capacity_];
}

std::span<const double> WakeField::advance(std::span<const double> thrust_coefficients) {
  const std::size_t n = layout_.size();
  if (thrust_coefficients.size() != n) throw ConfigError("wake: thrust coefficient count does not match layout");
  head_ = (head_ + 1) % capacity_;
  for (std::size_t i = 0; i < n; ++i) history_[i][head_] = thrust_coefficients[i];

  std::vector<double> sum_sq(n, 0.0);
  clamped_ = false;
  for (const Interaction& link : interactions_) {
    const DeficitResult d = wake_deficit(delayed_thrust_coefficient(link.upstream, link.delay), link.distance,
                                         layout_.rotor_diameter, expansion_);
    clamped_ = clamped_ || d.clamped;
    sum_sq[link.downstream] += d.value * d.value;
  }
  for (std::size_t i = 0; i < n; ++i) speeds_[i] = ambient_ * std::max(0.0, 1.0 - std::sqrt(sum_sq[i]));
  return speeds_;
}

std::vector<double> WakeField::steady_speeds(std::span<const double> thrust_coefficients) const {
  const std::size_t n = layout_.size();
  std::vector<double> sum_sq(n, 0.0);
  for (const Interaction& link : interactions_) {
    const double d =
        wake_deficit(thrust_coefficients[link.upstream], link.distance, layout_.rotor_diameter, expansion_).value;
    sum_sq[link.downstream] += d * d;
  }
  std::vector<double> speeds(n);
  for (std::size_t i = 0; i < n; ++i) speeds[i] = ambient_ * std::max(0.0, 1.0 - std::sqrt(sum_sq[i]));
  return speeds;
}

std::size_t WakeField::delay_steps(std::size_t upstream, std::size_t downstream) const {
  for (const Interaction& link : interactions_) {
    if (link.upstream == upstream && link.downstream == downstream) return link.delay;
  }
  return 0;
}

}  // namespace windfarm
