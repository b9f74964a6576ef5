#include "windfarm/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "windfarm/errors.hpp"

namespace windfarm {
namespace {

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(fmt::format("config: section '{}' must be a mapping", section));
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError(fmt::format("config: unknown key '{}' in '{}'", key, section));
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& target, const std::string& section) {
  const YAML::Node value = node[key];
  if (!value) return;
  try {
    target = value.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: '{}.{}' has the wrong type", section, key));
  }
}

void read_path(const YAML::Node& node, const char* key, std::filesystem::path& target,
               const std::filesystem::path& base_dir, const std::string& section) {
  std::string text;
  read(node, key, text, section);
  if (text.empty()) return;
  const std::filesystem::path p(text);
  target = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void parse_layout(const YAML::Node& node, ScenarioConfig& c) {
  check_keys(node, "layout", {"rows", "columns", "spacing_diameters", "rotor_diameter", "positions"});
  std::size_t rows = 3;
  std::size_t columns = 3;
  double spacing = 5.0;
  double diameter = 2.0 * c.turbine.rotor_radius;
  read(node, "rows", rows, "layout");
  read(node, "columns", columns, "layout");
  read(node, "spacing_diameters", spacing, "layout");
  read(node, "rotor_diameter", diameter, "layout");
  if (node["positions"]) {
    FarmLayout layout;
    layout.rotor_diameter = diameter;
    for (const auto& p : node["positions"]) {
      if (!p.IsSequence() || p.size() != 2) throw ConfigError("config: layout.positions entries must be [x, y]");
      layout.positions.push_back({p[0].as<double>(), p[1].as<double>()});
    }
    layout.rows = layout.positions.size();
    layout.columns = 1;
    c.layout = std::move(layout);
  } else {
    if (rows == 0 || columns == 0 || !(spacing > 0.0)) {
      throw ConfigError("config: layout needs positive rows, columns and spacing");
    }
    c.layout = FarmLayout::grid(rows, columns, spacing, diameter);
  }
}

void parse_turbine(const YAML::Node& node, ScenarioConfig& c, const std::filesystem::path& base_dir) {
  check_keys(node, "turbine",
             {"rated_power", "rotor_radius", "air_density", "gearbox_ratio", "generator_efficiency",
              "rated_generator_speed", "drivetrain_inertia", "greedy_gain", "cut_in_generator_speed",
              "region2_generator_speed", "region3_generator_speed", "region25_slip_percent", "torque_max",
              "torque_rate_limit", "pitch_min", "pitch_max", "pitch_rate_limit", "pitch_kp", "pitch_ki",
              "pitch_schedule_angle", "pitch_gain_scheduling", "speed_floor_fraction",
              "saturation_hysteresis_fraction", "aero_table_file"});
  TurbineParams& t = c.turbine;
  const std::string s = "turbine";
  read(node, "rated_power", t.rated_power, s);
  read(node, "rotor_radius", t.rotor_radius, s);
  read(node, "air_density", t.air_density, s);
  read(node, "gearbox_ratio", t.gearbox_ratio, s);
  read(node, "generator_efficiency", t.generator_efficiency, s);
  read(node, "rated_generator_speed", t.rated_generator_speed, s);
  read(node, "drivetrain_inertia", t.drivetrain_inertia, s);
  read(node, "greedy_gain", t.greedy_gain, s);
  read(node, "cut_in_generator_speed", t.cut_in_generator_speed, s);
  read(node, "region2_generator_speed", t.region2_generator_speed, s);
  read(node, "region3_generator_speed", t.region3_generator_speed, s);
  read(node, "region25_slip_percent", t.region25_slip_percent, s);
  read(node, "torque_max", t.torque_max, s);
  read(node, "torque_rate_limit", t.torque_rate_limit, s);
  read(node, "pitch_min", t.pitch_min, s);
  read(node, "pitch_max", t.pitch_max, s);
  read(node, "pitch_rate_limit", t.pitch_rate_limit, s);
  read(node, "pitch_kp", t.pitch_kp, s);
  read(node, "pitch_ki", t.pitch_ki, s);
  read(node, "pitch_schedule_angle", t.pitch_schedule_angle, s);
  read(node, "pitch_gain_scheduling", t.pitch_gain_scheduling, s);
  read(node, "speed_floor_fraction", t.speed_floor_fraction, s);
  read(node, "saturation_hysteresis_fraction", t.saturation_hysteresis_fraction, s);
  std::filesystem::path table;
  read_path(node, "aero_table_file", table, base_dir, s);
  if (!table.empty()) c.aero_table_file = table;
}

void parse_controller(const YAML::Node& node, ScenarioConfig& c) {
  check_keys(node, "controller",
             {"enabled", "setting_case", "ccl_gain", "tcl_gain", "distribution", "anti_windup", "input_noise_std",
              "output_noise_std"});
  ControllerSettings& k = c.controller;
  const std::string s = "controller";
  read(node, "enabled", k.enabled, s);
  read(node, "setting_case", k.setting_case, s);
  if (node["ccl_gain"]) {
    double g = 0.0;
    read(node, "ccl_gain", g, s);
    k.ccl_gain = g;
  }
  if (const YAML::Node g = node["tcl_gain"]) {
    if (g.IsSequence()) {
      k.tcl_gains = g.as<std::vector<double>>();
    } else {
      k.tcl_gains = {g.as<double>()};
    }
  }
  std::string distribution = "broadcast";
  read(node, "distribution", distribution, s);
  if (distribution == "broadcast") {
    k.distribution = CompensationDistribution::kBroadcast;
  } else if (distribution == "masked") {
    k.distribution = CompensationDistribution::kMasked;
  } else {
    throw ConfigError(fmt::format("config: controller.distribution '{}' is not broadcast|masked", distribution));
  }
  std::string anti_windup = "all_saturated";
  read(node, "anti_windup", anti_windup, s);
  if (anti_windup == "all_saturated") {
    k.anti_windup = AntiWindup::kAllSaturated;
  } else if (anti_windup == "none") {
    k.anti_windup = AntiWindup::kNone;
  } else {
    throw ConfigError(fmt::format("config: controller.anti_windup '{}' is not all_saturated|none", anti_windup));
  }
  read(node, "input_noise_std", k.input_noise_std, s);
  read(node, "output_noise_std", k.output_noise_std, s);
}

void parse_signal(const YAML::Node& node, ScenarioConfig& c, const std::filesystem::path& base_dir) {
  check_keys(node, "signal", {"derate_fraction", "engage_time", "peak_fraction", "program", "segments", "file"});
  SignalConfig& sig = c.signal;
  const std::string s = "signal";
  read(node, "derate_fraction", sig.derate_fraction, s);
  read(node, "engage_time", sig.engage_time, s);
  read(node, "peak_fraction", sig.peak_fraction, s);
  std::string program = "synthetic";
  read(node, "program", program, s);
  if (program == "synthetic") {
    sig.program = SignalProgram::kSynthetic;
  } else if (program == "constant") {
    sig.program = SignalProgram::kConstant;
  } else if (program == "segments") {
    sig.program = SignalProgram::kSegments;
  } else if (program == "file") {
    sig.program = SignalProgram::kFile;
  } else {
    throw ConfigError(fmt::format("config: signal.program '{}' is not synthetic|constant|segments|file", program));
  }
  if (const YAML::Node seg = node["segments"]) {
    for (const auto& p : seg) {
      if (!p.IsSequence() || p.size() != 2) throw ConfigError("config: signal.segments entries must be [t, fraction]");
      sig.segments.emplace_back(p[0].as<double>(), p[1].as<double>());
    }
  }
  read_path(node, "file", sig.file, base_dir, s);
}

}  // namespace

std::size_t ScenarioConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / sample_time));
}

FarmControlConfig ScenarioConfig::farm_control_config() const {
  FarmControlConfig fc;
  fc.turbine_count = turbine_count();
  fc.sample_time = sample_time;
  fc.ccl_enabled = controller.enabled;
  fc.tcl_enabled = controller.enabled && controller.setting_case == 2;
  fc.ccl_gain = controller.ccl_gain;
  fc.tcl_gains = controller.tcl_gains;
  fc.distribution = controller.distribution;
  fc.anti_windup = controller.anti_windup;
  return fc;
}

StepExperimentConfig ScenarioConfig::step_experiment_config() const {
  StepExperimentConfig e;
  e.turbine = turbine;
  e.inflow = identification.inflow;
  e.baseline = identification.baseline;
  e.step = identification.step;
  e.sample_time = sample_time;
  e.settle_time = identification.settle_time;
  e.pre_step_time = identification.pre_step_time;
  e.post_step_time = identification.post_step_time;
  return e;
}

void ScenarioConfig::validate() const {
  turbine.validate();
  layout.validate();
  if (!(sample_time > 0.0)) throw ConfigError("config: sample_time must be positive");
  if (!(duration > 0.0)) throw ConfigError("config: duration must be positive");
  const double steps = duration / sample_time;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw ConfigError("config: duration must be a whole multiple of sample_time");
  }
  if (!(inflow > 0.0)) throw ConfigError("config: inflow must be positive");
  if (!(wake_expansion >= 0.0)) throw ConfigError("config: wake.expansion must be non-negative");
  if (!(signal.derate_fraction > 0.0 && signal.derate_fraction <= 1.0)) {
    throw ConfigError("config: signal.derate_fraction must lie in (0, 1]");
  }
  if (!(signal.peak_fraction > 0.0 && signal.peak_fraction <= 1.0)) {
    throw ConfigError("config: signal.peak_fraction must lie in (0, 1]");
  }
  if (signal.engage_time < 0.0) throw ConfigError("config: signal.engage_time must be non-negative");
  if (signal.program == SignalProgram::kSegments) {
    if (signal.segments.empty()) throw ConfigError("config: signal.segments is empty");
    for (std::size_t i = 0; i < signal.segments.size(); ++i) {
      const auto [t, f] = signal.segments[i];
      if (f < 0.0 || f > 1.0) throw ConfigError("config: signal.segments fractions must lie in [0, 1]");
      if (i > 0 && t < signal.segments[i - 1].first) throw ConfigError("config: signal.segments times must increase");
    }
  }
  if (signal.program == SignalProgram::kFile && signal.file.empty()) {
    throw ConfigError("config: signal.program is file but signal.file is not set");
  }
  if (controller.setting_case != 1 && controller.setting_case != 2) {
    throw ConfigError("config: controller.setting_case must be 1 or 2");
  }
  if (controller.input_noise_std < 0.0 || controller.output_noise_std < 0.0) {
    throw ConfigError("config: noise standard deviations must be non-negative");
  }
  farm_control_config().validate();
  if (!(metrics_window.first < metrics_window.second)) throw ConfigError("config: metrics.window must be [start, end]");
  if (metrics_window.first > duration) throw ConfigError("config: metrics.window starts after the end of the run");
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: YAML syntax error: {}", e.what()));
  }
  ScenarioConfig c;
  if (!root || root.IsNull()) {
    c.validate();
    return c;
  }
  check_keys(root, "root",
             {"name", "inflow", "duration", "sample_time", "seed", "layout", "turbine", "wake", "controller", "signal",
              "metrics", "output", "identification"});
  read(root, "name", c.name, "root");
  read(root, "inflow", c.inflow, "root");
  read(root, "duration", c.duration, "root");
  read(root, "sample_time", c.sample_time, "root");
  read(root, "seed", c.seed, "root");

  // Turbine first: the default rotor diameter of the layout follows the rotor radius.
  if (root["turbine"]) parse_turbine(root["turbine"], c, base_dir);
  c.layout = FarmLayout::grid(3, 3, 5.0, 2.0 * c.turbine.rotor_radius);
  if (root["layout"]) parse_layout(root["layout"], c);
  if (const YAML::Node wake = root["wake"]) {
    check_keys(wake, "wake", {"expansion"});
    read(wake, "expansion", c.wake_expansion, "wake");
  }
  if (root["controller"]) parse_controller(root["controller"], c);
  if (root["signal"]) parse_signal(root["signal"], c, base_dir);
  if (const YAML::Node metrics = root["metrics"]) {
    check_keys(metrics, "metrics", {"window"});
    if (metrics["window"]) {
      const auto w = metrics["window"].as<std::vector<double>>();
      if (w.size() != 2) throw ConfigError("config: metrics.window must be [start, end]");
      c.metrics_window = {w[0], w[1]};
    }
  }
  if (const YAML::Node output = root["output"]) {
    check_keys(output, "output", {"timeseries", "metrics"});
    read_path(output, "timeseries", c.output.timeseries, base_dir, "output");
    read_path(output, "metrics", c.output.metrics, base_dir, "output");
  }
  if (const YAML::Node ident = root["identification"]) {
    check_keys(ident, "identification",
               {"inflow", "baseline", "step", "settle_time", "pre_step_time", "post_step_time", "experiment_csv",
                "model"});
    IdentificationSettings& id = c.identification;
    const std::string s = "identification";
    read(ident, "inflow", id.inflow, s);
    read(ident, "baseline", id.baseline, s);
    read(ident, "step", id.step, s);
    read(ident, "settle_time", id.settle_time, s);
    read(ident, "pre_step_time", id.pre_step_time, s);
    read(ident, "post_step_time", id.post_step_time, s);
    read_path(ident, "experiment_csv", id.experiment_csv, base_dir, s);
    read_path(ident, "model", id.model, base_dir, s);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.parent_path());
}

std::string to_string(SignalProgram program) {
  switch (program) {
    case SignalProgram::kSynthetic:
      return "synthetic";
    case SignalProgram::kConstant:
      return "constant";
    case SignalProgram::kSegments:
      return "segments";
    case SignalProgram::kFile:
      return "file";
  }
  return "unknown";
}

}  // namespace windfarm
