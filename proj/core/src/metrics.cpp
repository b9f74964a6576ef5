#include "windfarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "windfarm/errors.hpp"

namespace windfarm {

double rms_error(std::span<const double> time, std::span<const double> error, double start, double end) {
  if (time.size() != error.size()) throw ConfigError("rms_error: time and error lengths differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < time.size(); ++k) {
    if (time[k] < start || time[k] > end) continue;
    sum += error[k] * error[k];
    ++count;
  }
  if (count == 0) throw ConfigError(fmt::format("rms_error: no samples in window [{}, {}]", start, end));
  return std::sqrt(sum / static_cast<double>(count));
}

double occupancy(std::span<const double> time, std::span<const std::uint8_t> flags, double from) {
  std::size_t total = 0;
  std::size_t set = 0;
  for (std::size_t k = 0; k < time.size(); ++k) {
    if (time[k] < from) continue;
    ++total;
    set += flags[k] != 0 ? 1 : 0;
  }
  return total == 0 ? 0.0 : static_cast<double>(set) / static_cast<double>(total);
}

double thrust_spread(const TimeSeries& series, std::size_t tick) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < series.turbines(); ++i) {
    if (series.saturated[i][tick] != 0) continue;
    const double f = series.thrust[i][tick];
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    sum += f;
    ++m;
  }
  if (m == 0 || sum == 0.0) return 0.0;
  return (hi - lo) / (sum / static_cast<double>(m));
}

RunMetrics compute_metrics(const ScenarioConfig& config, const TimeSeries& series) {
  RunMetrics out;
  out.name = config.name;
  out.setting_case = config.controller.enabled ? config.controller.setting_case : 0;
  out.fingerprint = {config.inflow,
                     config.duration,
                     config.sample_time,
                     config.turbine_count(),
                     config.metrics_window.first,
                     config.metrics_window.second,
                     to_string(config.signal.program),
                     config.signal.derate_fraction,
                     config.signal.peak_fraction,
                     config.signal.engage_time};

  std::vector<double> error(series.ticks());
  for (std::size_t k = 0; k < series.ticks(); ++k) error[k] = series.farm_reference[k] - series.farm_power[k];
  out.rms_error = rms_error(series.time, error, config.metrics_window.first, config.metrics_window.second);

  const std::size_t n = series.turbines();
  for (std::size_t i = 0; i < n; ++i) {
    out.occupancy.push_back(occupancy(series.time, series.saturated[i], config.signal.engage_time));
  }
  const std::size_t rows = std::max<std::size_t>(config.layout.rows, 1);
  std::vector<double> row_sum(rows, 0.0);
  std::vector<std::size_t> row_count(rows, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = std::min(config.layout.row_of(i), rows - 1);
    row_sum[r] += out.occupancy[i];
    ++row_count[r];
  }
  for (std::size_t r = 0; r < rows; ++r) {
    out.row_occupancy.push_back(row_count[r] == 0 ? 0.0 : row_sum[r] / static_cast<double>(row_count[r]));
  }

  if (series.ticks() > 0) out.terminal_thrust_spread = thrust_spread(series, series.ticks() - 1);
  for (double r : series.balance_residual) out.max_balance_residual = std::max(out.max_balance_residual, std::abs(r));
  for (double p : series.farm_power) out.energy += p * config.sample_time;
  return out;
}

std::string format_metrics(const RunMetrics& m) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << m.name;
  e << YAML::Key << "setting_case" << YAML::Value << m.setting_case;
  e << YAML::Key << "fingerprint" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "inflow" << YAML::Value << m.fingerprint.inflow;
  e << YAML::Key << "duration" << YAML::Value << m.fingerprint.duration;
  e << YAML::Key << "sample_time" << YAML::Value << m.fingerprint.sample_time;
  e << YAML::Key << "turbines" << YAML::Value << m.fingerprint.turbines;
  e << YAML::Key << "window" << YAML::Value << YAML::Flow << YAML::BeginSeq << m.fingerprint.window_start
    << m.fingerprint.window_end << YAML::EndSeq;
  e << YAML::Key << "signal" << YAML::Value << m.fingerprint.signal;
  e << YAML::Key << "derate_fraction" << YAML::Value << m.fingerprint.derate_fraction;
  e << YAML::Key << "peak_fraction" << YAML::Value << m.fingerprint.peak_fraction;
  e << YAML::Key << "engage_time" << YAML::Value << m.fingerprint.engage_time;
  e << YAML::EndMap;
  e << YAML::Key << "rms_error" << YAML::Value << m.rms_error;
  e << YAML::Key << "occupancy" << YAML::Value << YAML::Flow << m.occupancy;
  e << YAML::Key << "row_occupancy" << YAML::Value << YAML::Flow << m.row_occupancy;
  e << YAML::Key << "terminal_thrust_spread" << YAML::Value << m.terminal_thrust_spread;
  e << YAML::Key << "max_balance_residual" << YAML::Value << m.max_balance_residual;
  e << YAML::Key << "energy" << YAML::Value << m.energy;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << format_metrics(metrics);
}

RunMetrics read_metrics(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("metrics: cannot read {}: {}", path.string(), e.what()));
  }
  try {
    RunMetrics m;
    m.name = root["name"].as<std::string>();
    m.setting_case = root["setting_case"].as<int>();
    const YAML::Node f = root["fingerprint"];
    m.fingerprint.inflow = f["inflow"].as<double>();
    m.fingerprint.duration = f["duration"].as<double>();
    m.fingerprint.sample_time = f["sample_time"].as<double>();
    m.fingerprint.turbines = f["turbines"].as<std::size_t>();
    const auto window = f["window"].as<std::vector<double>>();
    if (window.size() != 2) throw ConfigError("metrics: window must have two entries");
    m.fingerprint.window_start = window[0];
    m.fingerprint.window_end = window[1];
    m.fingerprint.signal = f["signal"].as<std::string>();
    m.fingerprint.derate_fraction = f["derate_fraction"].as<double>();
    m.fingerprint.peak_fraction = f["peak_fraction"].as<double>();
    m.fingerprint.engage_time = f["engage_time"].as<double>();
    m.rms_error = root["rms_error"].as<double>();
    m.occupancy = root["occupancy"].as<std::vector<double>>();
    m.row_occupancy = root["row_occupancy"].as<std::vector<double>>();
    m.terminal_thrust_spread = root["terminal_thrust_spread"].as<double>();
    m.max_balance_residual = root["max_balance_residual"].as<double>();
    m.energy = root["energy"].as<double>();
    return m;
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("metrics: malformed {}: {}", path.string(), e.what()));
  }
}

CaseComparison compare_cases(const RunMetrics& a, const RunMetrics& b) {
  if (!(a.fingerprint == b.fingerprint)) {
    throw ConfigError(fmt::format("compare: runs '{}' and '{}' use different scenarios", a.name, b.name));
  }
  CaseComparison c{a, b, a.rms_error > 0.0 ? b.rms_error / a.rms_error : 0.0, {}};
  std::string& s = c.summary;
  s += fmt::format("{:<28}{:>18}{:>18}\n", "", a.name, b.name);
  s += fmt::format("{:<28}{:>18}{:>18}\n", "setting case", a.setting_case, b.setting_case);
  s += fmt::format("{:<28}{:>18.1f}{:>18.1f}\n", "rms tracking error [kW]", a.rms_error / 1e3, b.rms_error / 1e3);
  for (std::size_t r = 0; r < std::min(a.row_occupancy.size(), b.row_occupancy.size()); ++r) {
    s += fmt::format("{:<28}{:>18.4f}{:>18.4f}\n", fmt::format("row {} saturation occupancy", r + 1),
                     a.row_occupancy[r], b.row_occupancy[r]);
  }
  s += fmt::format("{:<28}{:>18.5f}{:>18.5f}\n", "terminal thrust spread", a.terminal_thrust_spread,
                   b.terminal_thrust_spread);
  s += fmt::format("{:<28}{:>18.3f}{:>18.3f}\n", "energy [MWh]", a.energy / 3.6e9, b.energy / 3.6e9);
  s += fmt::format("rms ratio (second / first) = {:.4f}\n", c.rms_ratio);
  return c;
}

}  // namespace windfarm
