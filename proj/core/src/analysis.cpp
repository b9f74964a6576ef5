#include "windfarm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/os.h>

#include "windfarm/errors.hpp"
#include "windfarm/sysid.hpp"

namespace windfarm {
namespace {

std::string mask_string(const BalanceMask& mask) {
  std::string s;
  for (auto bit : mask) s.push_back(bit != 0 ? '1' : '0');
  return s;
}

BalanceMask mask_from_bits(std::uint64_t bits, std::size_t n) {
  BalanceMask mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = static_cast<std::uint8_t>((bits >> i) & 1U);
  return mask;
}

}  // namespace

WeightMatrix build_weight_matrix(std::span<const std::uint8_t> mask) {
  const auto n = static_cast<Eigen::Index>(mask.size());
  WeightMatrix out;
  out.W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (mask[static_cast<std::size_t>(j)] != 0) {
      out.W.col(j).setOnes();
      ++out.active;
    }
  }
  return out;
}

Eigen::MatrixXd balance_operator(const WeightMatrix& weights) {
  if (weights.active == 0) throw AnalysisError("analysis: no unsaturated turbine, balance loop undefined");
  const auto n = weights.W.rows();
  return weights.W / static_cast<double>(weights.active) - Eigen::MatrixXd::Identity(n, n);
}

ClosedLoopSystem build_closed_loop(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& gains,
                                   const WeightMatrix& weights, double sample_time, bool freeze_saturated) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n || gains.size() != n || weights.W.rows() != n) {
    throw AnalysisError("analysis: inconsistent closed-loop dimensions");
  }
  Eigen::MatrixXd lower = balance_operator(weights) * sample_time;
  if (freeze_saturated) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights.W(0, i) == 0.0) lower.row(i).setZero();
    }
  }
  ClosedLoopSystem sys;
  sys.A_cl.resize(2 * n, 2 * n);
  sys.A_cl.topLeftCorner(n, n) = A;
  sys.A_cl.topRightCorner(n, n) = B * gains.asDiagonal();
  sys.A_cl.bottomLeftCorner(n, n) = lower;
  sys.A_cl.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  sys.W = weights.W;
  sys.active = weights.active;
  sys.sample_time = sample_time;
  sys.gains = gains;
  return sys;
}

ClosedLoopSystem decoupled_closed_loop(double a, double b, double gain, double sample_time) {
  ClosedLoopSystem sys;
  sys.A_cl.resize(2, 2);
  sys.A_cl << a, b * gain, -sample_time, 1.0;
  sys.W = Eigen::MatrixXd::Ones(1, 1);
  sys.active = 1;
  sys.sample_time = sample_time;
  sys.gains = Eigen::VectorXd::Constant(1, gain);
  return sys;
}

SpectrumReport spectrum(const Eigen::MatrixXd& matrix, double unit_tolerance, double margin) {
  if (!matrix.allFinite()) throw AnalysisError("analysis: closed-loop matrix is not finite");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, false);
  if (solver.info() != Eigen::Success) throw AnalysisError("analysis: eigenvalue solver did not converge");

  SpectrumReport report;
  const Eigen::VectorXcd values = solver.eigenvalues();
  report.eigenvalues.assign(values.begin(), values.end());
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& x, const auto& y) { return std::abs(x) > std::abs(y); });

  bool outside = false;
  for (const auto& value : report.eigenvalues) {
    const double modulus = std::abs(value);
    if (std::abs(modulus - 1.0) <= unit_tolerance) {
      ++report.on_unit_circle;
    } else {
      outside = outside || modulus > 1.0;
      report.max_interior_modulus = std::max(report.max_interior_modulus, modulus);
    }
  }
  report.stable = !outside && report.max_interior_modulus <= 1.0 - margin;
  return report;
}

SpectrumReport spectrum(const ClosedLoopSystem& system, double unit_tolerance, double margin) {
  return spectrum(system.A_cl, unit_tolerance, margin);
}

std::array<std::complex<double>, 2> decoupled_poles(double a, double b, double gain, double sample_time) {
  const double sum = 1.0 + a;
  const double product = a + b * gain * sample_time;
  const std::complex<double> disc = std::sqrt(std::complex<double>(sum * sum - 4.0 * product, 0.0));
  return {(sum + disc) / 2.0, (sum - disc) / 2.0};
}

double place_gain(double a, double b, std::array<std::complex<double>, 2> poles, double sample_time) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0) || !(sample_time > 0.0)) {
    throw DesignError("place_gain: requires 0 < a < 1, b > 0, T_s > 0");
  }
  for (const auto& p : poles) {
    if (p.imag() != 0.0) throw DesignError("place_gain: complex poles rejected, design is overdamped");
    if (!(p.real() > 0.0 && p.real() < 1.0)) throw DesignError("place_gain: poles must lie in (0, 1)");
  }
  const double sum = poles[0].real() + poles[1].real();
  if (std::abs(sum - (1.0 + a)) > 1e-9 * (1.0 + a)) {
    throw DesignError(fmt::format("place_gain: pole sum {} must equal 1 + a = {}", sum, 1.0 + a));
  }
  const double gain = (poles[0].real() * poles[1].real() - a) / (b * sample_time);
  if (!(gain >= 0.0)) throw DesignError("place_gain: requested poles need a negative gain");
  return gain;
}

double overdamped_gain_limit(double a, double b, double sample_time) {
  return (1.0 - a) * (1.0 - a) / (4.0 * b * sample_time);
}

std::vector<PatternVerdict> sweep_patterns(double a, double b, double gain, double sample_time,
                                           std::size_t turbine_count, const SweepOptions& options) {
  if (turbine_count == 0) throw AnalysisError("sweep: turbine count must be at least 1");
  if (turbine_count > 24) throw AnalysisError("sweep: turbine count too large for pattern enumeration");
  const std::uint64_t full = (std::uint64_t{1} << turbine_count) - 1;

  std::set<std::uint64_t> chosen;
  if (options.exhaustive || turbine_count <= 4) {
    for (std::uint64_t bits = 1; bits <= full; ++bits) chosen.insert(bits);
  } else {
    chosen.insert(full);
    for (std::size_t i = 0; i < turbine_count; ++i) {
      chosen.insert(full & ~(std::uint64_t{1} << i));
      for (std::size_t j = i + 1; j < turbine_count; ++j) {
        chosen.insert(full & ~(std::uint64_t{1} << i) & ~(std::uint64_t{1} << j));
      }
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::uint64_t> pick(1, full);
    std::set<std::uint64_t> sampled;
    while (sampled.size() < options.random_samples && chosen.size() + sampled.size() < full) {
      const std::uint64_t bits = pick(rng);
      if (!chosen.contains(bits)) sampled.insert(bits);
    }
    chosen.insert(sampled.begin(), sampled.end());
  }

  const DiagonalThrustModel model{a * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(turbine_count),
                                                                  static_cast<Eigen::Index>(turbine_count)),
                                  b * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(turbine_count),
                                                                  static_cast<Eigen::Index>(turbine_count))};
  const Eigen::VectorXd gains = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(turbine_count), gain);

  std::vector<PatternVerdict> verdicts;
  verdicts.reserve(chosen.size());
  // Descending order lists the all-unsaturated pattern first.
  for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) {
    PatternVerdict v;
    v.mask = mask_from_bits(*it, turbine_count);
    const WeightMatrix weights = build_weight_matrix(v.mask);
    v.balance_determinant = balance_operator(weights).determinant();
    v.report = spectrum(build_closed_loop(model.A, model.B, gains, weights, sample_time, options.freeze_saturated));
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

void write_spectrum_csv(std::span<const PatternVerdict> verdicts, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("pattern,mask,active,index,real,imag,modulus,on_unit_circle\n");
  for (std::size_t p = 0; p < verdicts.size(); ++p) {
    const auto& v = verdicts[p];
    const auto active = std::count_if(v.mask.begin(), v.mask.end(), [](auto s) { return s != 0; });
    for (std::size_t i = 0; i < v.report.eigenvalues.size(); ++i) {
      const auto& z = v.report.eigenvalues[i];
      const bool unit = std::abs(std::abs(z) - 1.0) <= kUnitCircleTolerance;
      out.print("{},{},{},{},{},{},{},{}\n", p, mask_string(v.mask), active, i, z.real(), z.imag(), std::abs(z),
                unit ? 1 : 0);
    }
  }
}

std::string format_spectrum_report(std::span<const PatternVerdict> verdicts, double a, double b, double gain,
                                   double sample_time) {
  std::string text = fmt::format("# thrust balance closed-loop spectrum\na = {}\nb = {}\nK = {}\nT_s = {}\n", a, b,
                                 gain, sample_time);
  const auto poles = decoupled_poles(a, b, gain, sample_time);
  text += fmt::format("decoupled_poles = {}{:+}j, {}{:+}j\n", poles[0].real(), poles[0].imag(), poles[1].real(),
                      poles[1].imag());
  text += fmt::format("patterns = {}\n\n", verdicts.size());
  std::size_t stable = 0;
  for (const auto& v : verdicts) {
    stable += v.report.stable ? 1 : 0;
    text += fmt::format("mask {}  unit_circle={}  max_interior={:.12f}  det={:.3e}  {}\n", mask_string(v.mask),
                        v.report.on_unit_circle, v.report.max_interior_modulus, v.balance_determinant,
                        !v.report.stable             ? "UNSTABLE"
                        : v.report.on_unit_circle > 0 ? "marginally-stable"
                                                      : "stable");
  }
  text += fmt::format("\nstable_patterns = {}/{}\n", stable, verdicts.size());
  return text;
}

}  // namespace windfarm
