#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "windfarm/analysis.hpp"
#include "windfarm/errors.hpp"
#include "windfarm/metrics.hpp"
#include "windfarm/scenario_config.hpp"
#include "windfarm/simulation.hpp"
#include "windfarm/sysid.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

namespace wf = windfarm;

int simulate(const std::string& config_path, const std::string& timeseries_out, const std::string& metrics_out) {
  wf::ScenarioConfig config = wf::load_scenario(config_path);
  if (!timeseries_out.empty()) config.output.timeseries = timeseries_out;
  if (!metrics_out.empty()) config.output.metrics = metrics_out;

  const wf::SimulationResult result = wf::run_scenario(config);
  const wf::RunMetrics metrics = wf::compute_metrics(config, result.series);
  if (!config.output.timeseries.empty()) wf::write_timeseries_csv(result.series, config.output.timeseries);
  if (!config.output.metrics.empty()) wf::write_metrics(metrics, config.output.metrics);

  fmt::print("{}", wf::format_metrics(metrics));
  if (result.speed_floor_events > 0) fmt::print(stderr, "warning: speed floor hit {} times\n", result.speed_floor_events);
  if (result.near_stall_events > 0) fmt::print(stderr, "warning: near-stall {} times\n", result.near_stall_events);
  if (result.table_extrapolated) fmt::print(stderr, "warning: aerodynamic table extrapolated\n");
  if (result.wake_clamped) fmt::print(stderr, "warning: thrust coefficient clamped in wake model\n");
  return kOk;
}

int identify(const std::string& config_path) {
  const wf::ScenarioConfig config = wf::load_scenario(config_path);
  const wf::AeroTables tables = wf::scenario_tables(config);
  const wf::StepExperiment experiment = wf::run_step_experiment(config.step_experiment_config(), tables);
  wf::write_experiment_csv(experiment, config.identification.experiment_csv);
  const wf::LinearThrustModel model = wf::fit_first_order(experiment);
  wf::write_model(model, config.identification.model);
  fmt::print("K1 = {}\nT1 = {}\nT_s = {}\na = {}\nb = {}\nfit_percent = {:.2f}\n", model.gain, model.time_constant,
             model.sample_time, model.a, model.b, model.fit_percent);
  fmt::print("experiment: {}\nmodel: {}\n", config.identification.experiment_csv.string(),
             config.identification.model.string());
  return kOk;
}

struct AnalyzeOptions {
  std::string model;
  bool sweep = false;
  bool exhaustive = false;
  bool freeze_saturated = false;
  std::size_t turbines = 9;
  double gain = 0.5;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  std::string csv;
  std::string report;
};

int analyze(const AnalyzeOptions& o) {
  const wf::LinearThrustModel model = wf::read_model(o.model);
  wf::discretize_forward_euler(model.gain, model.time_constant, model.sample_time);
  std::vector<wf::PatternVerdict> verdicts;
  if (o.sweep) {
    wf::SweepOptions options;
    options.exhaustive = o.exhaustive;
    options.random_samples = o.samples;
    options.seed = o.seed;
    options.freeze_saturated = o.freeze_saturated;
    verdicts = wf::sweep_patterns(model.a, model.b, o.gain, model.sample_time, o.turbines, options);
  } else {
    wf::PatternVerdict v;
    v.mask.assign(o.turbines, 1);
    const wf::WeightMatrix weights = wf::build_weight_matrix(v.mask);
    const wf::DiagonalThrustModel plant = wf::assemble_diagonal_model(model.a, model.b, o.turbines);
    const Eigen::VectorXd gains = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(o.turbines), o.gain);
    v.balance_determinant = wf::balance_operator(weights).determinant();
    v.report = wf::spectrum(
        wf::build_closed_loop(plant.A, plant.B, gains, weights, model.sample_time, o.freeze_saturated));
    verdicts.push_back(std::move(v));
  }
  const std::string text = wf::format_spectrum_report(verdicts, model.a, model.b, o.gain, model.sample_time);
  fmt::print("{}", text);
  if (!o.report.empty()) {
    std::ofstream out(o.report, std::ios::binary);
    if (!out) throw wf::ConfigError(fmt::format("cannot write {}", o.report));
    out << text;
  }
  if (!o.csv.empty()) wf::write_spectrum_csv(verdicts, o.csv);
  return kOk;
}

int compare(const std::string& a, const std::string& b) {
  const wf::CaseComparison c = wf::compare_cases(wf::read_metrics(a), wf::read_metrics(b));
  fmt::print("{}", c.summary);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wind farm power tracking and thrust balancing simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string timeseries_out;
  std::string metrics_out;
  auto* sim = app.add_subcommand("simulate", "Run a farm scenario");
  sim->add_option("config", config_path, "Scenario YAML")->required();
  sim->add_option("--timeseries", timeseries_out, "Override the time-series CSV path");
  sim->add_option("--metrics", metrics_out, "Override the metrics YAML path");

  auto* ident = app.add_subcommand("identify", "Step experiment and first-order thrust model fit");
  ident->add_option("config", config_path, "Scenario YAML with an identification section")->required();

  AnalyzeOptions ao;
  auto* an = app.add_subcommand("analyze", "Closed-loop spectrum of the thrust balance loop");
  an->add_option("model", ao.model, "Model file written by identify")->required();
  an->add_flag("--sweep", ao.sweep, "Analyse saturation patterns");
  an->add_flag("--exhaustive", ao.exhaustive, "Enumerate all 2^N - 1 patterns");
  an->add_flag("--freeze-saturated", ao.freeze_saturated, "Hold integrators of saturated turbines");
  an->add_option("--turbines", ao.turbines, "Number of turbines")->check(CLI::PositiveNumber);
  an->add_option("--gain", ao.gain, "Thrust balance integral gain [W/N]");
  an->add_option("--samples", ao.samples, "Random patterns when not exhaustive");
  an->add_option("--seed", ao.seed, "Pattern sampling seed");
  an->add_option("--csv", ao.csv, "Write eigenvalues as CSV");
  an->add_option("--report", ao.report, "Write the text report");

  std::string run_a;
  std::string run_b;
  auto* cmp = app.add_subcommand("compare", "Compare two metrics files");
  cmp->add_option("runA", run_a, "First metrics YAML")->required();
  cmp->add_option("runB", run_b, "Second metrics YAML")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return simulate(config_path, timeseries_out, metrics_out);
    if (*ident) return identify(config_path);
    if (*an) return analyze(ao);
    if (*cmp) return compare(run_a, run_b);
  } catch (const wf::NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return kNumericalError;
  } catch (const wf::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const wf::DesignError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumericalError;
  }
  return kConfigError;
}
