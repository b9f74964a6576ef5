#pragma once

#include <filesystem>
#include <vector>

namespace windfarm {

/// Betz limit 16/27.
inline constexpr double kBetzLimit = 16.0 / 27.0;

struct CoefficientLookup {
  double value = 0.0;
  /// Query fell outside the grid and was clamped to its edge.
  bool extrapolated = false;
};

/**
 * Power and thrust coefficient maps over (tip-speed ratio, pitch) with
 * bilinear interpolation.
 *
 * Both tables are stored row-major with one row per tip-speed ratio and one
 * column per pitch angle (rad). C_P^max and lambda^opt are taken from the
 * grid itself, so C_P(lambda^opt, fine_pitch) is exactly the grid maximum.
 */
class AeroTables {
 public:
  AeroTables(std::vector<double> tip_speed_ratios, std::vector<double> pitch_angles,
             std::vector<double> power_coefficients, std::vector<double> thrust_coefficients);

  /// Grid generated from the analytic C_P approximation with momentum-derived C_T.
  static AeroTables generate_default();

  /// Plain-text grid file; see save() for the layout.
  static AeroTables load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  [[nodiscard]] CoefficientLookup power_coefficient(double tip_speed_ratio, double pitch) const;
  [[nodiscard]] CoefficientLookup thrust_coefficient(double tip_speed_ratio, double pitch) const;

  [[nodiscard]] double max_power_coefficient() const noexcept { return cp_max_; }
  [[nodiscard]] double optimal_tip_speed_ratio() const noexcept { return tsr_opt_; }
  [[nodiscard]] double fine_pitch() const noexcept { return pitch_fine_; }

  [[nodiscard]] const std::vector<double>& tip_speed_ratios() const noexcept { return tsr_; }
  [[nodiscard]] const std::vector<double>& pitch_angles() const noexcept { return pitch_; }
  [[nodiscard]] const std::vector<double>& power_table() const noexcept { return cp_; }
  [[nodiscard]] const std::vector<double>& thrust_table() const noexcept { return ct_; }

 private:
  [[nodiscard]] CoefficientLookup interpolate(const std::vector<double>& table,
                                              double tip_speed_ratio, double pitch) const;

  std::vector<double> tsr_;
  std::vector<double> pitch_;
  std::vector<double> cp_;
  std::vector<double> ct_;
  double cp_max_ = 0.0;
  double tsr_opt_ = 0.0;
  double pitch_fine_ = 0.0;
};

/// Exponential C_P(lambda, pitch) approximation, clamped to [0, Betz].
/// Maximum about 0.484 at lambda = 7.55 and zero pitch.
double analytic_power_coefficient(double tip_speed_ratio, double pitch);

/**
 * Thrust coefficient consistent with a power coefficient under actuator-disk
 * momentum theory with a uniform profile-loss factor: solves
 * cp = xi * 4a(1-a)^2 on the branch a <= 1/3 with xi = cp_max / Betz, and
 * returns 4a(1-a).
 */
double momentum_thrust_coefficient(double power_coefficient, double max_power_coefficient);

}  // namespace windfarm
