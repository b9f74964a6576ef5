#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace windfarm {

struct Position {
  double x = 0.0;  // m, downstream along the mean wind
  double y = 0.0;  // m, cross-stream
};

struct FarmLayout {
  std::vector<Position> positions;
  double rotor_diameter = 126.0;
  std::size_t rows = 0;
  std::size_t columns = 0;

  /// Row-major grid, row 0 facing the wind, turbine index = row * columns + column.
  static FarmLayout grid(std::size_t rows, std::size_t columns, double spacing_diameters, double rotor_diameter);

  [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
  [[nodiscard]] std::size_t row_of(std::size_t turbine) const noexcept {
    return columns == 0 ? 0 : turbine / columns;
  }

  /// Throws ConfigError if positions coincide or the diameter is not positive.
  void validate() const;
};

struct DeficitResult {
  double value = 0.0;
  /// C_T >= 1 was clamped below one.
  bool clamped = false;
};

/// Top-hat deficit (1 - sqrt(1 - C_T)) / (1 + k_w x / D)^2.
DeficitResult wake_deficit(double thrust_coefficient, double distance, double rotor_diameter, double expansion);

/**
 * Engineering wake surrogate. Each turbine's rotor-effective speed is the
 * ambient speed reduced by the root-sum-square of the deficits cast by
 * upstream turbines, using each upstream C_T as it was one advection delay
 * earlier. Wind blows along +x; a downstream rotor is waked when its centre
 * lies inside the expanding wake cylinder.
 */
class WakeField {
 public:
  /// `initial_thrust_coefficients` seed the delay history and set the
  /// nominal wake speed used for advection delays.
  WakeField(FarmLayout layout, double ambient_speed, double expansion, double dt,
            std::span<const double> initial_thrust_coefficients);

  /// Records the current C_T of every turbine and returns the new effective speeds.
  std::span<const double> advance(std::span<const double> thrust_coefficients);

  /// Effective speeds for a static C_T vector, without history.
  [[nodiscard]] std::vector<double> steady_speeds(std::span<const double> thrust_coefficients) const;

  [[nodiscard]] std::span<const double> effective_speeds() const noexcept { return speeds_; }
  [[nodiscard]] double ambient_speed() const noexcept { return ambient_; }
  [[nodiscard]] const FarmLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] bool clamped() const noexcept { return clamped_; }

  /// Delay in whole steps for the wake of `upstream` to reach `downstream`; 0 if not waked.
  [[nodiscard]] std::size_t delay_steps(std::size_t upstream, std::size_t downstream) const;

 private:
  struct Interaction {
    std::size_t upstream = 0;
    std::size_t downstream = 0;
    double distance = 0.0;
    std::size_t delay = 0;
  };

  [[nodiscard]] double delayed_thrust_coefficient(std::size_t turbine, std::size_t lag) const;

  FarmLayout layout_;
  double ambient_ = 0.0;
  double expansion_ = 0.0;
  std::vector<Interaction> interactions_;
  // One ring buffer of past C_T per turbine, newest at head_.
  std::vector<std::vector<double>> history_;
  std::size_t capacity_ = 1;
  std::size_t head_ = 0;
  std::vector<double> speeds_;
  bool clamped_ = false;
};

}  // namespace windfarm
