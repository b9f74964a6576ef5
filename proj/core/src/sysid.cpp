#include "windfarm/sysid.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <fmt/os.h>

#include "windfarm/errors.hpp"
#include "windfarm/text_io.hpp"

namespace windfarm {
namespace {

struct Detrended {
  std::vector<double> input;
  std::vector<double> output;
  double output_offset = 0.0;
};

double pre_step_mean(std::span<const double> values, std::size_t step_index) {
  if (step_index == 0) return values.front();
  const auto end = values.begin() + static_cast<std::ptrdiff_t>(step_index);
  return std::accumulate(values.begin(), end, 0.0) / static_cast<double>(step_index);
}

Detrended detrend(const StepExperiment& e) {
  Detrended d;
  const double u0 = pre_step_mean(e.input, e.step_index);
  d.output_offset = pre_step_mean(e.output, e.step_index);
  d.input.reserve(e.input.size());
  d.output.reserve(e.output.size());
  for (double u : e.input) d.input.push_back(u - u0);
  for (double y : e.output) d.output.push_back(y - d.output_offset);
  return d;
}

// Unit-gain first-order response to a sampled, held input.
void unit_response(std::span<const double> input, double pole, std::vector<double>& out) {
  out.resize(input.size());
  double x = 0.0;
  for (std::size_t k = 0; k < input.size(); ++k) {
    out[k] = x;
    x = pole * x + (1.0 - pole) * input[k];
  }
}

struct Candidate {
  double time_constant = 0.0;
  double gain = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

Candidate evaluate(const Detrended& d, double time_constant, double sample_time, std::vector<double>& scratch) {
  unit_response(d.input, std::exp(-sample_time / time_constant), scratch);
  double xy = 0.0;
  double xx = 0.0;
  for (std::size_t k = 0; k < scratch.size(); ++k) {
    xy += scratch[k] * d.output[k];
    xx += scratch[k] * scratch[k];
  }
  Candidate c{time_constant, xx > 0.0 ? xy / xx : 0.0, 0.0};
  for (std::size_t k = 0; k < scratch.size(); ++k) {
    const double r = d.output[k] - c.gain * scratch[k];
    c.cost += r * r;
  }
  return c;
}

double norm_of(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

StepExperiment run_step_experiment(const StepExperimentConfig& config, const AeroTables& tables) {
  if (config.step == 0.0) throw IdentificationError("identification: step size is zero, response undefined");
  if (!(config.sample_time > 0.0) || !(config.post_step_time > 0.0) || config.pre_step_time < 0.0 ||
      config.settle_time < 0.0) {
    throw ConfigError("identification: durations must be positive");
  }
  const double ceiling = available_power(config.inflow, config.turbine, tables);
  if (config.baseline > ceiling || config.baseline + config.step > ceiling) {
    throw IdentificationError(fmt::format(
        "identification: set points {} W / {} W exceed available power {} W at {} m/s", config.baseline,
        config.baseline + config.step, ceiling, config.inflow));
  }

  Turbine turbine(config.turbine, tables);
  turbine.initialize_steady(config.inflow, config.baseline);
  if (turbine.state().saturated) {
    throw IdentificationError("identification: turbine saturated at the baseline set point");
  }
  const double dt = config.sample_time;
  const auto settle_steps = static_cast<std::size_t>(std::lround(config.settle_time / dt));
  for (std::size_t k = 0; k < settle_steps; ++k) turbine.step(config.baseline, config.inflow, dt);

  StepExperiment e;
  e.baseline = config.baseline;
  e.step = config.step;
  e.inflow = config.inflow;
  e.sample_time = dt;
  e.step_index = static_cast<std::size_t>(std::lround(config.pre_step_time / dt));
  const std::size_t total = e.step_index + static_cast<std::size_t>(std::lround(config.post_step_time / dt));
  for (std::size_t k = 0; k < total; ++k) {
    const double demand = k < e.step_index ? config.baseline : config.baseline + config.step;
    e.time.push_back(static_cast<double>(k) * dt);
    e.input.push_back(demand);
    e.output.push_back(turbine.state().thrust);
    turbine.step(demand, config.inflow, dt);
    e.saturated = e.saturated || turbine.state().saturated;
  }
  return e;
}

double fit_percentage(std::span<const double> measured, std::span<const double> predicted) {
  if (measured.size() != predicted.size() || measured.empty()) {
    throw IdentificationError("fit: series lengths differ or are empty");
  }
  const double mean = std::accumulate(measured.begin(), measured.end(), 0.0) / static_cast<double>(measured.size());
  double err = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    err += (measured[k] - predicted[k]) * (measured[k] - predicted[k]);
    spread += (measured[k] - mean) * (measured[k] - mean);
  }
  if (spread == 0.0) throw IdentificationError("fit: measured series is constant");
  return 100.0 * (1.0 - std::sqrt(err) / std::sqrt(spread));
}

LinearThrustModel fit_first_order(const StepExperiment& experiment) {
  const std::size_t n = experiment.output.size();
  if (n < 3 || experiment.input.size() != n) throw IdentificationError("fit: experiment is too short");
  if (experiment.saturated) throw IdentificationError("fit: experiment invalid, turbine saturated");
  if (!(experiment.sample_time > 0.0)) throw IdentificationError("fit: sample time must be positive");
  const Detrended d = detrend(experiment);
  if (norm_of(d.input) == 0.0) throw IdentificationError("fit: input has no step");
  if (norm_of(d.output) == 0.0) throw IdentificationError("fit: output does not respond to the step");

  const double ts = experiment.sample_time;
  const double record = ts * static_cast<double>(n);
  const double log_lo = std::log(ts / 20.0);
  const double log_hi = std::log(20.0 * record);
  constexpr int kGrid = 400;
  std::vector<double> scratch;

  Candidate best;
  int best_index = 0;
  for (int i = 0; i <= kGrid; ++i) {
    const double t1 = std::exp(log_lo + (log_hi - log_lo) * i / kGrid);
    const Candidate c = evaluate(d, t1, ts, scratch);
    if (c.cost < best.cost) {
      best = c;
      best_index = i;
    }
  }
  if (best_index == 0 || best_index == kGrid) {
    throw IdentificationError("fit: time constant search did not converge inside the grid");
  }

  // Golden-section refinement in log T1 between the neighbouring grid points.
  const double step = (log_hi - log_lo) / kGrid;
  double lo = log_lo + (best_index - 1) * step;
  double hi = log_lo + (best_index + 1) * step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  Candidate c1 = evaluate(d, std::exp(x1), ts, scratch);
  Candidate c2 = evaluate(d, std::exp(x2), ts, scratch);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    if (c1.cost < c2.cost) {
      hi = x2;
      x2 = x1;
      c2 = c1;
      x1 = hi - ratio * (hi - lo);
      c1 = evaluate(d, std::exp(x1), ts, scratch);
    } else {
      lo = x1;
      x1 = x2;
      c1 = c2;
      x2 = lo + ratio * (hi - lo);
      c2 = evaluate(d, std::exp(x2), ts, scratch);
    }
  }
  const Candidate refined = c1.cost < c2.cost ? c1 : c2;
  if (refined.cost < best.cost) best = refined;
  if (!(best.time_constant > 0.0) || !std::isfinite(best.gain)) {
    throw IdentificationError("fit: non-physical time constant");
  }

  LinearThrustModel model;
  model.gain = best.gain;
  model.time_constant = best.time_constant;
  model.sample_time = ts;

  unit_response(d.input, std::exp(-ts / best.time_constant), scratch);
  std::vector<double> predicted(n);
  for (std::size_t k = 0; k < n; ++k) predicted[k] = d.output_offset + best.gain * scratch[k];
  model.fit_percent = fit_percentage(experiment.output, predicted);

  if (ts < model.time_constant) {
    const DiscreteFirstOrder disc = discretize_forward_euler(model.gain, model.time_constant, ts);
    model.a = disc.a;
    model.b = disc.b;
  } else {
    model.a = std::numeric_limits<double>::quiet_NaN();
    model.b = std::numeric_limits<double>::quiet_NaN();
  }
  return model;
}

DiscreteFirstOrder discretize_forward_euler(double gain, double time_constant, double sample_time) {
  if (!(time_constant > 0.0)) throw IdentificationError("discretize: T1 must be positive");
  if (!(sample_time > 0.0)) throw IdentificationError("discretize: T_s must be positive");
  if (sample_time >= time_constant) {
    throw IdentificationError(
        fmt::format("discretize: forward Euler unstable for T_s = {} >= T1 = {}", sample_time, time_constant));
  }
  return {1.0 - sample_time / time_constant, sample_time * gain / time_constant};
}

DiagonalThrustModel assemble_diagonal_model(double a, double b, std::size_t turbine_count) {
  if (turbine_count == 0) throw ConfigError("model: turbine count must be at least 1");
  const auto n = static_cast<Eigen::Index>(turbine_count);
  return {a * Eigen::MatrixXd::Identity(n, n), b * Eigen::MatrixXd::Identity(n, n)};
}

std::vector<double> simulate_discrete(double a, double b, std::span<const double> input, double initial) {
  std::vector<double> out(input.size());
  double f = initial;
  for (std::size_t k = 0; k < input.size(); ++k) {
    out[k] = f;
    f = a * f + b * input[k];
  }
  return out;
}

void write_experiment_csv(const StepExperiment& e, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("# inflow_m_s={}\n# sample_time_s={}\n# baseline_w={}\n# step_w={}\n# step_index={}\n# saturated={}\n",
            e.inflow, e.sample_time, e.baseline, e.step, e.step_index, e.saturated ? 1 : 0);
  out.print("t,P_dem,F_T\n");
  for (std::size_t k = 0; k < e.time.size(); ++k) out.print("{},{},{}\n", e.time[k], e.input[k], e.output[k]);
}

StepExperiment read_experiment_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t ct = table.column("t");
  const std::size_t cu = table.column("P_dem");
  const std::size_t cy = table.column("F_T");
  StepExperiment e;
  for (const auto& row : table.rows) {
    e.time.push_back(row[ct]);
    e.input.push_back(row[cu]);
    e.output.push_back(row[cy]);
  }
  if (e.time.size() < 3) throw IdentificationError(fmt::format("{}: experiment too short", path.string()));
  auto meta = [&](const char* key, double fallback) {
    const auto it = table.metadata.find(key);
    return it == table.metadata.end() ? fallback : io::parse_double(it->second, path.string());
  };
  e.sample_time = meta("sample_time_s", e.time[1] - e.time[0]);
  e.inflow = meta("inflow_m_s", 0.0);
  e.baseline = meta("baseline_w", e.input.front());
  e.step = meta("step_w", e.input.back() - e.input.front());
  e.saturated = meta("saturated", 0.0) != 0.0;
  std::size_t inferred = 0;
  while (inferred < e.input.size() && std::abs(e.input[inferred] - e.baseline) <= 0.5 * std::abs(e.step)) ++inferred;
  e.step_index = static_cast<std::size_t>(meta("step_index", static_cast<double>(inferred)));
  return e;
}

void write_model(const LinearThrustModel& m, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("# first-order thrust model F_T/P_dem = K1 / (T1 s + 1), forward Euler at T_s\n");
  out.print("K1 = {}\nT1 = {}\nT_s = {}\na = {}\nb = {}\nfit_percent = {}\n", m.gain, m.time_constant,
            m.sample_time, m.a, m.b, m.fit_percent);
}

LinearThrustModel read_model(const std::filesystem::path& path) {
  const auto values = io::read_key_values(path);
  auto get = [&](const char* key) {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError(fmt::format("{}: missing '{}'", path.string(), key));
    return io::parse_double(it->second, path.string());
  };
  LinearThrustModel m;
  m.gain = get("K1");
  m.time_constant = get("T1");
  m.sample_time = get("T_s");
  m.a = get("a");
  m.b = get("b");
  m.fit_percent = get("fit_percent");
  if (!(m.time_constant > 0.0) || !(m.sample_time > 0.0) || !std::isfinite(m.a) || !std::isfinite(m.b)) {
    throw ConfigError(fmt::format("{}: model parameters are not usable", path.string()));
  }
  return m;
}

}  // namespace windfarm
