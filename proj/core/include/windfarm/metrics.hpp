#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "windfarm/scenario_config.hpp"
#include "windfarm/simulation.hpp"

namespace windfarm {

/// Scenario parameters two runs must share to be comparable.
struct RunFingerprint {
  double inflow = 0.0;
  double duration = 0.0;
  double sample_time = 0.0;
  std::size_t turbines = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::string signal;
  double derate_fraction = 0.0;
  double peak_fraction = 0.0;
  double engage_time = 0.0;

  bool operator==(const RunFingerprint&) const = default;
};

struct RunMetrics {
  std::string name;
  int setting_case = 0;
  RunFingerprint fingerprint;
  double rms_error = 0.0;                 ///< W, over the metrics window
  std::vector<double> occupancy;          ///< saturated fraction per turbine after engagement
  std::vector<double> row_occupancy;      ///< mean of occupancy per layout row
  double terminal_thrust_spread = 0.0;    ///< (max - min) / mean over unsaturated turbines, last tick
  double max_balance_residual = 0.0;      ///< max |sum e_T| [N]
  double energy = 0.0;                    ///< J, sum of P_meas_WF T_s
};

/// RMS of `error` over samples with start <= t <= end. Throws ConfigError on an empty window.
double rms_error(std::span<const double> time, std::span<const double> error, double start, double end);

/// Fraction of ticks with t >= from where `flags` is set.
double occupancy(std::span<const double> time, std::span<const std::uint8_t> flags, double from);

/// (max - min) / mean of thrust over unsaturated turbines at tick k; 0 when none is unsaturated.
double thrust_spread(const TimeSeries& series, std::size_t tick);

RunMetrics compute_metrics(const ScenarioConfig& config, const TimeSeries& series);

void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path);
std::string format_metrics(const RunMetrics& metrics);
RunMetrics read_metrics(const std::filesystem::path& path);

struct CaseComparison {
  RunMetrics a;
  RunMetrics b;
  double rms_ratio = 0.0;  ///< b / a
  std::string summary;
};

/// Throws ConfigError when the fingerprints differ.
CaseComparison compare_cases(const RunMetrics& a, const RunMetrics& b);

}  // namespace windfarm
