#include "windfarm/reference_signal.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "windfarm/errors.hpp"
#include "windfarm/text_io.hpp"

namespace windfarm {
namespace {

using Knot = std::pair<double, double>;

constexpr std::array<Knot, 13> kShape{{
    {0.00, 0.00},
    {0.06, 0.55},
    {0.14, 0.55},
    {0.22, 1.00},
    {0.32, 1.00},
    {0.40, 0.45},
    {0.48, 0.70},
    {0.56, 0.30},
    {0.66, 0.85},
    {0.74, 0.85},
    {0.84, 0.50},
    {0.92, 0.75},
    {1.00, 0.60},
}};

template <typename Range>
double interpolate(const Range& knots, double x) {
  if (x <= knots.front().first) return knots.front().second;
  if (x >= knots.back().first) return knots.back().second;
  const auto upper = std::upper_bound(knots.begin(), knots.end(), x,
                                      [](double value, const Knot& k) { return value < k.first; });
  const auto lower = upper - 1;
  const double span = upper->first - lower->first;
  if (span <= 0.0) return upper->second;
  const double w = (x - lower->first) / span;
  return lower->second + w * (upper->second - lower->second);
}

}  // namespace

double synthetic_shape(double tau) { return interpolate(kShape, tau); }

ReferenceSignal::ReferenceSignal(const SignalConfig& config, double farm_rated_power, double duration)
    : config_(config), rated_(farm_rated_power), duration_(duration) {
  if (config_.program != SignalProgram::kFile) return;
  const io::CsvTable table = io::read_csv(config_.file);
  const std::size_t t_col = table.column("t");
  const std::size_t p_col = table.column("P_ref_WF");
  for (const auto& row : table.rows) samples_.emplace_back(row[t_col], row[p_col]);
  if (samples_.empty()) throw ConfigError(fmt::format("signal: {} has no samples", config_.file.string()));
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (samples_[i].first < samples_[i - 1].first) {
      throw ConfigError(fmt::format("signal: times in {} must increase", config_.file.string()));
    }
  }
}

double ReferenceSignal::operator()(double t) const {
  if (config_.program == SignalProgram::kFile) return interpolate(samples_, t);
  if (!engaged(t)) return derated_level();
  const double tau = t - config_.engage_time;
  switch (config_.program) {
    case SignalProgram::kConstant:
      return config_.peak_fraction * rated_;
    case SignalProgram::kSegments:
      return interpolate(config_.segments, tau) * rated_;
    case SignalProgram::kSynthetic:
    case SignalProgram::kFile:
      break;
  }
  const double length = duration_ - config_.engage_time;
  const double shape = length > 0.0 ? synthetic_shape(tau / length) : 0.0;
  return (config_.derate_fraction + (config_.peak_fraction - config_.derate_fraction) * shape) * rated_;
}

}  // namespace windfarm
