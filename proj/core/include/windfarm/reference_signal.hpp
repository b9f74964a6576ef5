#pragma once

#include <utility>
#include <vector>

#include "windfarm/scenario_config.hpp"

namespace windfarm {

/// Normalised shape of the built-in program on [0, 1]: 0 = derated level, 1 = peak.
double synthetic_shape(double tau);

/**
 * Farm power reference P_ref_WF(t). Before engage_time it holds the derated
 * level; afterwards it follows the configured program.
 */
class ReferenceSignal {
 public:
  ReferenceSignal(const SignalConfig& config, double farm_rated_power, double duration);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] bool engaged(double t) const noexcept { return t >= config_.engage_time; }
  [[nodiscard]] double derated_level() const noexcept { return config_.derate_fraction * rated_; }

 private:
  SignalConfig config_;
  double rated_ = 0.0;
  double duration_ = 0.0;
  std::vector<std::pair<double, double>> samples_;  // (t, W) from file
};

}  // namespace windfarm
