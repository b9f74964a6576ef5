#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windfarm/farm_control.hpp"

namespace windfarm {

inline constexpr double kUnitCircleTolerance = 1e-9;
inline constexpr double kStabilityMargin = 1e-6;

struct WeightMatrix {
  Eigen::MatrixXd W;        ///< every row equals the mask
  std::size_t active = 0;   ///< M, number of unsaturated turbines
};

WeightMatrix build_weight_matrix(std::span<const std::uint8_t> mask);

/// (1/M) W - I; throws AnalysisError when M = 0.
Eigen::MatrixXd balance_operator(const WeightMatrix& weights);

struct ClosedLoopSystem {
  Eigen::MatrixXd A_cl;     ///< [[A, B K], [((1/M) W - I) T_s, I]]
  Eigen::MatrixXd W;
  std::size_t active = 0;
  double sample_time = 0.0;
  Eigen::VectorXd gains;    ///< diagonal of K_I^TCL
};

/**
 * Augmented thrust/integral closed loop. With `freeze_saturated` the integral
 * rows of saturated turbines are replaced by identity rows, matching the
 * controller, which zeroes e_T for saturated turbines.
 */
ClosedLoopSystem build_closed_loop(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& gains,
                                   const WeightMatrix& weights, double sample_time, bool freeze_saturated = false);

/// Single-channel loop [[a, b k], [-T_s, 1]] seen by each balancing mode.
ClosedLoopSystem decoupled_closed_loop(double a, double b, double gain, double sample_time);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  ///< sorted by descending modulus
  std::size_t on_unit_circle = 0;
  double max_interior_modulus = 0.0;
  /// No eigenvalue outside the unit circle and every interior one within 1 - margin.
  bool stable = false;
};

SpectrumReport spectrum(const ClosedLoopSystem& system, double unit_tolerance = kUnitCircleTolerance,
                        double margin = kStabilityMargin);
SpectrumReport spectrum(const Eigen::MatrixXd& matrix, double unit_tolerance = kUnitCircleTolerance,
                        double margin = kStabilityMargin);

/// Roots of lambda^2 - (1 + a) lambda + (a + b k T_s), the decoupled balancing poles.
std::array<std::complex<double>, 2> decoupled_poles(double a, double b, double gain, double sample_time);

/**
 * Gain k placing the decoupled poles at the requested real pair. The pair
 * must sum to 1 + a (the loop has one free parameter) and lie in (0, 1).
 * Throws DesignError otherwise.
 */
double place_gain(double a, double b, std::array<std::complex<double>, 2> poles, double sample_time);

/// Largest gain that keeps the decoupled poles real.
double overdamped_gain_limit(double a, double b, double sample_time);

struct PatternVerdict {
  BalanceMask mask;
  SpectrumReport report;
  double balance_determinant = 0.0;  ///< det((1/M) W - I)
};

struct SweepOptions {
  bool exhaustive = false;       ///< all 2^N - 1 patterns
  std::size_t random_samples = 100;
  std::uint64_t seed = 1;
  bool freeze_saturated = false;
};

/// Analyses saturation patterns with M >= 1. Exhaustive for N <= 4 or when
/// requested; otherwise all single and double saturations plus random masks.
std::vector<PatternVerdict> sweep_patterns(double a, double b, double gain, double sample_time,
                                           std::size_t turbine_count, const SweepOptions& options);

void write_spectrum_csv(std::span<const PatternVerdict> verdicts, const std::filesystem::path& path);
std::string format_spectrum_report(std::span<const PatternVerdict> verdicts, double a, double b, double gain,
                                   double sample_time);

}  // namespace windfarm
