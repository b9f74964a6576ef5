#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace windfarm {

/// Per-turbine balance mask: 1 = unsaturated (takes part in the thrust mean), 0 = saturated.
using BalanceMask = std::vector<std::uint8_t>;

/// How the scalar compensation integrator reaches the turbines.
enum class CompensationDistribution {
  kBroadcast,  ///< same increment to every turbine
  kMasked,     ///< unsaturated turbines only
};

enum class AntiWindup {
  kAllSaturated,  ///< hold the compensation integrator while every turbine is saturated and the error is positive
  kNone,
};

struct FarmControlConfig {
  std::size_t turbine_count = 0;
  double sample_time = 0.1;
  bool ccl_enabled = true;
  bool tcl_enabled = true;
  /// Compensation integral gain [1/s]; defaults to 1 / (T_s N_t).
  std::optional<double> ccl_gain;
  /// Diagonal thrust-balance integral gains [W/N]; empty means 0.5 for every turbine.
  std::vector<double> tcl_gains;
  CompensationDistribution distribution = CompensationDistribution::kBroadcast;
  AntiWindup anti_windup = AntiWindup::kAllSaturated;

  [[nodiscard]] double effective_ccl_gain() const;
  [[nodiscard]] std::vector<double> effective_tcl_gains() const;
  void validate() const;
};

struct FarmControllerState {
  double compensation = 0.0;            ///< u_P [W]
  std::vector<double> thrust_integral;  ///< e_I [N s]
  BalanceMask mask;                     ///< last saturation mask used
  std::vector<double> demand;           ///< last dispatched set points [W]
};

/// Output of one controller tick.
struct Dispatch {
  std::vector<double> demand;        ///< P_dem [W], clamped to [0, rated]
  std::vector<double> compensation;  ///< Delta P_P^ref [W]
  std::vector<double> balancing;     ///< Delta P_T^ref [W]
  std::vector<double> thrust_error;  ///< e_T [N]
  std::vector<std::uint8_t> clamped;
  double total_error = 0.0;          ///< e_P^total [W]
  bool balancing_skipped = false;    ///< no unsaturated turbine, mean undefined
};

/// P_ref_WF - sum(P_meas).
double total_error(double farm_reference, std::span<const double> measured_power);

/// Mean thrust over unsaturated turbines; nullopt when all are saturated.
std::optional<double> mean_thrust(std::span<const double> thrust, std::span<const std::uint8_t> mask);

/// e_T: mean - F_i for unsaturated turbines, 0 for saturated ones. Empty when all are saturated.
std::vector<double> thrust_error(std::span<const double> thrust, std::span<const std::uint8_t> mask);

/// Equal share of the farm reference for every turbine.
std::vector<double> uniform_dispatch(double farm_reference, std::size_t turbine_count);

struct ComposedSetpoints {
  std::vector<double> demand;
  std::vector<std::uint8_t> clamped;
};

/// Element-wise P_ref + Delta P_P + Delta P_T clamped to [0, rated_power_i].
ComposedSetpoints compose_setpoints(std::span<const double> reference, std::span<const double> compensation,
                                    std::span<const double> balancing, std::span<const double> rated_power);

/**
 * Two-loop farm controller.
 *
 * The compensation loop integrates the farm tracking error with gain
 * ccl_gain and adds the result to the turbine set points; it holds while all
 * turbines are saturated and the farm is short of the reference. The thrust loop integrates each unsaturated
 * turbine's distance to the unsaturated mean thrust and feeds it back through
 * a diagonal gain. Saturated channels keep their integral value.
 */
class FarmController {
 public:
  explicit FarmController(FarmControlConfig config);

  /// One update of the compensation integrator; returns Delta P_P^ref.
  std::vector<double> ccl_step(double error, std::span<const std::uint8_t> mask);

  /// One update of the thrust integrators with e_T; returns Delta P_T^ref = K e_I.
  std::vector<double> tcl_step(std::span<const double> thrust_error);

  /// Full tick: measurements in, set points out.
  Dispatch step(std::span<const double> reference, std::span<const double> measured_power,
                std::span<const double> measured_thrust, std::span<const std::uint8_t> mask,
                std::span<const double> rated_power);

  [[nodiscard]] const FarmControllerState& state() const noexcept { return state_; }
  [[nodiscard]] const FarmControlConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::vector<double> balancing_output() const;
  [[nodiscard]] std::vector<double> compensation_output(std::span<const std::uint8_t> mask) const;

 private:
  FarmControlConfig config_;
  double ccl_gain_ = 0.0;
  std::vector<double> tcl_gains_;
  FarmControllerState state_;
};

}  // namespace windfarm
