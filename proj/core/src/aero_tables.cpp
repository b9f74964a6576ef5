#include "windfarm/aero_tables.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/os.h>

#include "windfarm/errors.hpp"

namespace windfarm {
namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

// c1 (c2/li - c3 b - c4 b^x - c5) exp(-c6/li), 1/li = 1/(s lambda + a b) - d/(b^3 + 1), b in degrees.
// Fitted to the reference 5 MW rated-power pitch schedule and its pitch sensitivity.
constexpr double kC1 = 0.24565;
constexpr double kC2 = 154.99;
constexpr double kC3 = 0.88749;
constexpr double kC4 = 0.00793;
constexpr double kPitchExponent = 1.0988;
constexpr double kC5 = 7.1448;
constexpr double kC6 = 14.699;
constexpr double kPitchShift = 0.065526;
constexpr double kPitchCorrection = 0.010248;
constexpr double kTsrScale = 1.06484;

void require_increasing(const std::vector<double>& grid, const char* name) {
  if (grid.size() < 2) {
    throw ConfigError(fmt::format("aero tables: {} grid needs at least two points", name));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError(fmt::format("aero tables: {} grid must be strictly increasing", name));
    }
  }
}

// Index of the cell [i, i+1] containing x, with x clamped into the grid.
std::size_t locate(const std::vector<double>& grid, double& x, bool& clamped) {
  if (x < grid.front()) {
    x = grid.front();
    clamped = true;
  } else if (x > grid.back()) {
    x = grid.back();
    clamped = true;
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  return std::min(i, grid.size() - 2);
}

std::vector<double> default_tsr_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 360; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<double> default_pitch_grid() {
  std::vector<double> grid;
  constexpr double deg = 1.0 / kRadToDeg;
  for (int i = 0; i <= 300; ++i) grid.push_back(0.1 * i * deg);
  for (int i = 31; i <= 90; ++i) grid.push_back(i * deg);
  return grid;
}

std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  while (in >> token) {
    if (token.front() == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return token;
  }
  throw ConfigError(fmt::format("aero tables: unexpected end of file in {}", path.string()));
}

double next_number(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_token(in, path);
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("aero tables: bad number '{}' in {}", token, path.string()));
  }
}

void expect_keyword(std::istream& in, const std::string& keyword, const std::filesystem::path& path) {
  const std::string token = next_token(in, path);
  if (token != keyword) {
    throw ConfigError(
        fmt::format("aero tables: expected '{}' but found '{}' in {}", keyword, token, path.string()));
  }
}

}  // namespace

double analytic_power_coefficient(double tip_speed_ratio, double pitch) {
  const double lambda = tip_speed_ratio * kTsrScale;
  const double beta = std::max(pitch * kRadToDeg, 0.0);
  const double denom = lambda + kPitchShift * beta;
  if (lambda <= 0.0 || denom <= 0.0) return 0.0;
  const double inv_lambda_i = 1.0 / denom - kPitchCorrection / (beta * beta * beta + 1.0);
  if (inv_lambda_i <= 0.0) return 0.0;
  const double cp = kC1 * (kC2 * inv_lambda_i - kC3 * beta - kC4 * std::pow(beta, kPitchExponent) - kC5) *
                    std::exp(-kC6 * inv_lambda_i);
  return std::clamp(cp, 0.0, kBetzLimit);
}

double momentum_thrust_coefficient(double power_coefficient, double max_power_coefficient) {
  if (power_coefficient <= 0.0 || max_power_coefficient <= 0.0) return 0.0;
  const double loss = max_power_coefficient / kBetzLimit;
  const double target = power_coefficient / loss;
  if (target >= kBetzLimit) return 8.0 / 9.0;
  // 4a(1-a)^2 is increasing on [0, 1/3].
  double lo = 0.0;
  double hi = 1.0 / 3.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = 4.0 * mid * (1.0 - mid) * (1.0 - mid);
    (value < target ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  return 4.0 * a * (1.0 - a);
}

AeroTables::AeroTables(std::vector<double> tip_speed_ratios, std::vector<double> pitch_angles,
                       std::vector<double> power_coefficients, std::vector<double> thrust_coefficients)
    : tsr_(std::move(tip_speed_ratios)),
      pitch_(std::move(pitch_angles)),
      cp_(std::move(power_coefficients)),
      ct_(std::move(thrust_coefficients)) {
  require_increasing(tsr_, "tip-speed ratio");
  require_increasing(pitch_, "pitch");
  const std::size_t cells = tsr_.size() * pitch_.size();
  if (cp_.size() != cells || ct_.size() != cells) {
    throw ConfigError(fmt::format("aero tables: expected {} values per table, got C_P={} C_T={}", cells,
                                  cp_.size(), ct_.size()));
  }
  for (std::size_t i = 0; i < cells; ++i) {
    if (!std::isfinite(cp_[i]) || cp_[i] < 0.0 || cp_[i] > kBetzLimit) {
      throw ConfigError(fmt::format("aero tables: C_P value {} outside [0, Betz]", cp_[i]));
    }
    if (!std::isfinite(ct_[i]) || ct_[i] < 0.0) {
      throw ConfigError(fmt::format("aero tables: C_T value {} is negative or non-finite", ct_[i]));
    }
  }
  const auto best = std::max_element(cp_.begin(), cp_.end());
  const auto index = static_cast<std::size_t>(best - cp_.begin());
  cp_max_ = *best;
  tsr_opt_ = tsr_[index / pitch_.size()];
  pitch_fine_ = pitch_[index % pitch_.size()];
  if (cp_max_ <= 0.0) throw ConfigError("aero tables: C_P is zero everywhere");
}

AeroTables AeroTables::generate_default() {
  std::vector<double> tsr = default_tsr_grid();
  std::vector<double> pitch = default_pitch_grid();
  std::vector<double> cp;
  cp.reserve(tsr.size() * pitch.size());
  for (double lambda : tsr) {
    for (double theta : pitch) cp.push_back(analytic_power_coefficient(lambda, theta));
  }
  const double cp_max = *std::max_element(cp.begin(), cp.end());
  std::vector<double> ct;
  ct.reserve(cp.size());
  for (double value : cp) ct.push_back(momentum_thrust_coefficient(value, cp_max));
  return AeroTables(std::move(tsr), std::move(pitch), std::move(cp), std::move(ct));
}

AeroTables AeroTables::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("aero tables: cannot open {}", path.string()));

  auto read_grid = [&](const std::string& keyword) {
    expect_keyword(in, keyword, path);
    const double count = next_number(in, path);
    if (count < 2 || count != std::floor(count)) {
      throw ConfigError(fmt::format("aero tables: bad {} count in {}", keyword, path.string()));
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (double& v : grid) v = next_number(in, path);
    return grid;
  };
  std::vector<double> tsr = read_grid("tip_speed_ratio");
  std::vector<double> pitch = read_grid("pitch");

  auto read_table = [&](const std::string& keyword) {
    expect_keyword(in, keyword, path);
    std::vector<double> table(tsr.size() * pitch.size());
    for (double& v : table) v = next_number(in, path);
    return table;
  };
  std::vector<double> cp = read_table("power_coefficient");
  std::vector<double> ct = read_table("thrust_coefficient");
  return AeroTables(std::move(tsr), std::move(pitch), std::move(cp), std::move(ct));
}

void AeroTables::save(const std::filesystem::path& path) const {
  auto out = fmt::output_file(path.string());
  out.print("# rows: tip-speed ratio, columns: pitch [rad]\n");
  auto write_grid = [&](const char* keyword, const std::vector<double>& grid) {
    out.print("{} {}\n{}\n", keyword, grid.size(), fmt::join(grid, " "));
  };
  write_grid("tip_speed_ratio", tsr_);
  write_grid("pitch", pitch_);
  auto write_table = [&](const char* keyword, const std::vector<double>& table) {
    out.print("{}\n", keyword);
    for (std::size_t row = 0; row < tsr_.size(); ++row) {
      const auto first = table.begin() + static_cast<std::ptrdiff_t>(row * pitch_.size());
      out.print("{}\n", fmt::join(first, first + static_cast<std::ptrdiff_t>(pitch_.size()), " "));
    }
  };
  write_table("power_coefficient", cp_);
  write_table("thrust_coefficient", ct_);
}

CoefficientLookup AeroTables::interpolate(const std::vector<double>& table, double tip_speed_ratio,
                                          double pitch) const {
  CoefficientLookup result;
  const std::size_t i = locate(tsr_, tip_speed_ratio, result.extrapolated);
  const std::size_t j = locate(pitch_, pitch, result.extrapolated);
  const double u = (tip_speed_ratio - tsr_[i]) / (tsr_[i + 1] - tsr_[i]);
  const double w = (pitch - pitch_[j]) / (pitch_[j + 1] - pitch_[j]);
  const std::size_t cols = pitch_.size();
  const double f00 = table[i * cols + j];
  const double f01 = table[i * cols + j + 1];
  const double f10 = table[(i + 1) * cols + j];
  const double f11 = table[(i + 1) * cols + j + 1];
  result.value = (1.0 - u) * ((1.0 - w) * f00 + w * f01) + u * ((1.0 - w) * f10 + w * f11);
  return result;
}

CoefficientLookup AeroTables::power_coefficient(double tip_speed_ratio, double pitch) const {
  return interpolate(cp_, tip_speed_ratio, pitch);
}

CoefficientLookup AeroTables::thrust_coefficient(double tip_speed_ratio, double pitch) const {
  return interpolate(ct_, tip_speed_ratio, pitch);
}

}  // namespace windfarm
