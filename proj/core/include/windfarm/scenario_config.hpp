#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "windfarm/farm_control.hpp"
#include "windfarm/sysid.hpp"
#include "windfarm/turbine.hpp"
#include "windfarm/wake_field.hpp"

namespace windfarm {

enum class SignalProgram {
  kSynthetic,  ///< built-in ramps and holds, peak at peak_fraction
  kConstant,   ///< hold peak_fraction after engagement
  kSegments,   ///< piecewise-linear (time, fraction) points after engagement
  kFile,       ///< replay t,P_ref_WF from csv for the whole run
};

struct SignalConfig {
  double derate_fraction = 0.5;
  double engage_time = 300.0;  // s, controllers and the program start here
  double peak_fraction = 0.7;
  SignalProgram program = SignalProgram::kSynthetic;
  std::vector<std::pair<double, double>> segments;  // (t [s], fraction of farm rated power)
  std::filesystem::path file;
};

struct ControllerSettings {
  bool enabled = true;
  int setting_case = 2;  ///< 1 = compensation only, 2 = compensation + thrust balance
  std::optional<double> ccl_gain;
  std::vector<double> tcl_gains;
  CompensationDistribution distribution = CompensationDistribution::kBroadcast;
  AntiWindup anti_windup = AntiWindup::kAllSaturated;
  double input_noise_std = 0.0;   ///< W, added to dispatched set points
  double output_noise_std = 0.0;  ///< N, added to thrust measurements
};

struct OutputSettings {
  std::filesystem::path timeseries;
  std::filesystem::path metrics;
};

struct IdentificationSettings {
  double inflow = 12.0;
  double baseline = 2.5e6;
  double step = 1.0e6;
  double settle_time = 300.0;
  double pre_step_time = 30.0;
  double post_step_time = 150.0;
  std::filesystem::path experiment_csv = "step_experiment.csv";
  std::filesystem::path model = "thrust_model.txt";
};

struct ScenarioConfig {
  std::string name = "scenario";
  FarmLayout layout = FarmLayout::grid(3, 3, 5.0, 126.0);
  TurbineParams turbine;
  std::optional<std::filesystem::path> aero_table_file;
  double wake_expansion = 0.05;
  double inflow = 13.0;       // m/s
  double duration = 1200.0;   // s
  double sample_time = 0.1;   // s
  SignalConfig signal;
  ControllerSettings controller;
  std::uint64_t seed = 1;
  std::pair<double, double> metrics_window{300.0, 1000.0};
  OutputSettings output;
  IdentificationSettings identification;

  [[nodiscard]] std::size_t turbine_count() const noexcept { return layout.size(); }
  [[nodiscard]] std::size_t step_count() const;
  [[nodiscard]] double farm_rated_power() const noexcept {
    return turbine.rated_power * static_cast<double>(turbine_count());
  }
  [[nodiscard]] FarmControlConfig farm_control_config() const;
  [[nodiscard]] StepExperimentConfig step_experiment_config() const;

  /// Throws ConfigError listing the first violated constraint.
  void validate() const;
};

/// Parses the YAML scenario schema; relative paths resolve against `base_dir`.
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::string to_string(SignalProgram program);

}  // namespace windfarm
