#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "windfarm/aero_tables.hpp"
#include "windfarm/turbine.hpp"

namespace windfarm {

/// Open-loop set-point step on a single free-stream turbine.
struct StepExperimentConfig {
  TurbineParams turbine;
  double inflow = 12.0;           // m/s
  double baseline = 2.5e6;        // W
  double step = 1.0e6;            // W
  double sample_time = 0.1;       // s
  double settle_time = 300.0;     // s, simulated and discarded before recording
  double pre_step_time = 30.0;    // s, recorded before the step
  double post_step_time = 150.0;  // s, recorded after the step
};

struct StepExperiment {
  std::vector<double> time;    // s, uniform at sample_time
  std::vector<double> input;   // P_dem [W]
  std::vector<double> output;  // F_T [N]
  double baseline = 0.0;
  double step = 0.0;
  double inflow = 0.0;
  double sample_time = 0.0;
  std::size_t step_index = 0;
  /// The turbine saturated while recording; the experiment is unusable.
  bool saturated = false;
};

/// First-order thrust model K1 / (T1 s + 1) and its forward-Euler discretization.
struct LinearThrustModel {
  double gain = 0.0;           // K1 [N/W]
  double time_constant = 0.0;  // T1 [s]
  double sample_time = 0.0;    // T_s [s]
  double a = 0.0;              // 1 - T_s / T1
  double b = 0.0;              // T_s K1 / T1 [N/W]
  double fit_percent = 0.0;
};

struct DiscreteFirstOrder {
  double a = 0.0;
  double b = 0.0;
};

struct DiagonalThrustModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// Throws IdentificationError for a zero step or a baseline the wind cannot supply.
StepExperiment run_step_experiment(const StepExperimentConfig& config, const AeroTables& tables);

/**
 * Output-error least-squares fit of K1 / (T1 s + 1) to the de-trended step
 * response. For each T1 the optimal K1 is linear; T1 is found by a
 * logarithmic grid search refined with golden-section search.
 */
LinearThrustModel fit_first_order(const StepExperiment& experiment);

/// 100 (1 - |y - y_hat| / |y - mean(y)|).
double fit_percentage(std::span<const double> measured, std::span<const double> predicted);

/// a = 1 - T_s/T1, b = T_s K1/T1. Throws IdentificationError unless 0 < T_s < T1.
DiscreteFirstOrder discretize_forward_euler(double gain, double time_constant, double sample_time);

DiagonalThrustModel assemble_diagonal_model(double a, double b, std::size_t turbine_count);

/// Response of F(k+1) = a F(k) + b u(k) from F(0) = initial.
std::vector<double> simulate_discrete(double a, double b, std::span<const double> input, double initial = 0.0);

void write_experiment_csv(const StepExperiment& experiment, const std::filesystem::path& path);
StepExperiment read_experiment_csv(const std::filesystem::path& path);

void write_model(const LinearThrustModel& model, const std::filesystem::path& path);
LinearThrustModel read_model(const std::filesystem::path& path);

}  // namespace windfarm
