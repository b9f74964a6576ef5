#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>

#include "windfarm/analysis.hpp"
#include "windfarm/errors.hpp"
#include "windfarm/sysid.hpp"

namespace wf = windfarm;

namespace {

// Roots of z^2 - (1 + a) z + (a + b k T_s) by the quadratic formula.
std::pair<double, double> hand_poles(double a, double b, double k, double ts) {
  const double p = 1.0 + a;
  const double q = a + b * k * ts;
  const double r = std::sqrt(p * p - 4.0 * q);
  return {(p + r) / 2.0, (p - r) / 2.0};
}

wf::ClosedLoopSystem diagonal_loop(double a, double b, double k, double ts, const wf::BalanceMask& mask) {
  const auto n = mask.size();
  const auto model = wf::assemble_diagonal_model(a, b, n);
  return wf::build_closed_loop(model.A, model.B, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), k),
                               wf::build_weight_matrix(mask), ts);
}

}  // namespace

TEST(WeightMatrix, AllUnsaturated) {
  const auto w = wf::build_weight_matrix(wf::BalanceMask{1, 1, 1});
  EXPECT_TRUE(w.W.isApprox(Eigen::MatrixXd::Ones(3, 3)));
  EXPECT_EQ(w.active, 3U);
}

TEST(WeightMatrix, MaskedColumn) {
  const auto w = wf::build_weight_matrix(wf::BalanceMask{1, 0, 1});
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 0, 1, 1, 0, 1, 1, 0, 1;
  EXPECT_EQ(w.W, expected);
  EXPECT_EQ(w.active, 2U);
}

TEST(BalanceOperator, NoActiveTurbineIsAnError) {
  EXPECT_THROW(wf::balance_operator(wf::build_weight_matrix(wf::BalanceMask{0, 0})), wf::AnalysisError);
}

TEST(ClosedLoop, SingleTurbineMatrix) {
  const auto sys = diagonal_loop(0.9, 0.002, 0.5, 0.1, wf::BalanceMask{1});
  Eigen::Matrix2d expected;
  expected << 0.9, 0.001, 0.0, 1.0;
  EXPECT_TRUE(sys.A_cl.isApprox(expected, 1e-15));
  const auto r = wf::spectrum(sys);
  ASSERT_EQ(r.eigenvalues.size(), 2U);
  EXPECT_NEAR(std::abs(r.eigenvalues[0] - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.eigenvalues[1] - 0.9), 0.0, 1e-12);
  EXPECT_EQ(r.on_unit_circle, 1U);
}

TEST(ClosedLoop, ZeroGainSpectrumIsOpenLoopPlusIntegrators) {
  const auto sys = diagonal_loop(0.8, 0.002, 0.0, 0.1, wf::BalanceMask{1, 1, 0, 1});
  const auto r = wf::spectrum(sys);
  const auto ones = std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                  [](auto z) { return std::abs(z - 1.0) < 1e-12; });
  const auto plant = std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                   [](auto z) { return std::abs(z - 0.8) < 1e-12; });
  EXPECT_EQ(ones, 4);
  EXPECT_EQ(plant, 4);
}

TEST(Spectrum, IdentityHasUnitEigenvalues) {
  const auto r = wf::spectrum(Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(r.on_unit_circle, 5U);
  for (const auto& z : r.eigenvalues) EXPECT_NEAR(std::abs(z - 1.0), 0.0, 1e-15);
}

TEST(Spectrum, DetectsInstability) {
  Eigen::MatrixXd m(2, 2);
  m << 1.2, 0.0, 0.0, 0.5;
  EXPECT_FALSE(wf::spectrum(m).stable);
  EXPECT_THROW(wf::spectrum(Eigen::MatrixXd::Constant(2, 2, std::nan(""))), wf::AnalysisError);
}

TEST(Spectrum, NineTurbinesAllUnsaturatedSingleUnitPole) {
  const auto r = wf::spectrum(diagonal_loop(0.9, 0.002, 0.5, 0.1, wf::BalanceMask(9, 1)));
  EXPECT_EQ(r.on_unit_circle, 1U);
  EXPECT_LT(r.max_interior_modulus, 1.0);
  EXPECT_TRUE(r.stable);
}

TEST(Sweep, ExhaustiveThreeTurbines) {
  const auto verdicts = wf::sweep_patterns(0.9, 0.002, 0.5, 0.1, 3, {});
  EXPECT_EQ(verdicts.size(), 7U);
  for (const auto& v : verdicts) {
    EXPECT_GE(v.report.on_unit_circle, 1U);
    EXPECT_LT(v.report.max_interior_modulus, 1.0);
    EXPECT_NEAR(v.balance_determinant, 0.0, 1e-9);
  }
}

TEST(Sweep, SampledNineTurbinesIncludesSingleAndDoubleSaturations) {
  wf::SweepOptions o;
  o.random_samples = 100;
  const auto verdicts = wf::sweep_patterns(0.9, 0.002, 0.5, 0.1, 9, o);
  EXPECT_EQ(verdicts.size(), 1U + 9U + 36U + 100U);
  EXPECT_EQ(verdicts.front().mask, wf::BalanceMask(9, 1));
  for (const auto& v : verdicts) EXPECT_TRUE(v.report.stable);
}

TEST(Sweep, FreezeVariantKeepsUnitPoles) {
  wf::SweepOptions o;
  o.freeze_saturated = true;
  for (const auto& v : wf::sweep_patterns(0.9, 0.002, 0.5, 0.1, 4, o)) {
    const auto saturated = std::count(v.mask.begin(), v.mask.end(), 0);
    EXPECT_EQ(v.report.on_unit_circle, static_cast<std::size_t>(1 + saturated));
  }
}

TEST(DecoupledPoles, MatchHandComputation) {
  const auto [hi, lo] = hand_poles(0.9, 0.002, 0.5, 0.1);
  const auto poles = wf::decoupled_poles(0.9, 0.002, 0.5, 0.1);
  EXPECT_NEAR(poles[0].real(), hi, 1e-12);
  EXPECT_NEAR(poles[1].real(), lo, 1e-12);
  EXPECT_NEAR(hi, 0.99899, 1e-5);
  EXPECT_NEAR(lo, 0.90101, 1e-5);

  const auto r = wf::spectrum(wf::decoupled_closed_loop(0.9, 0.002, 0.5, 0.1));
  EXPECT_NEAR(std::abs(r.eigenvalues[0] - hi), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.eigenvalues[1] - lo), 0.0, 1e-12);
}

TEST(PlaceGain, ZeroGainPoles) {
  const auto poles = wf::decoupled_poles(0.9, 0.002, 0.0, 0.1);
  EXPECT_NEAR(poles[0].real(), 1.0, 1e-15);
  EXPECT_NEAR(poles[1].real(), 0.9, 1e-15);
}

TEST(PlaceGain, RoundTrip) {
  const auto poles = wf::decoupled_poles(0.9, 0.002, 0.5, 0.1);
  EXPECT_NEAR(wf::place_gain(0.9, 0.002, poles, 0.1), 0.5, 1e-9);
}

TEST(PlaceGain, RejectsInfeasibleRequests) {
  using C = std::complex<double>;
  EXPECT_THROW(wf::place_gain(0.9, 0.002, {C(0.95, 0.01), C(0.95, -0.01)}, 0.1), wf::DesignError);
  EXPECT_THROW(wf::place_gain(0.9, 0.002, {C(0.99, 0.0), C(0.5, 0.0)}, 0.1), wf::DesignError);
  EXPECT_THROW(wf::place_gain(0.9, 0.002, {C(1.5, 0.0), C(0.4, 0.0)}, 0.1), wf::DesignError);
}

TEST(PlaceGain, OverdampedLimit) {
  const double k = wf::overdamped_gain_limit(0.9, 0.002, 0.1);
  EXPECT_NEAR(std::abs(wf::decoupled_poles(0.9, 0.002, 0.999 * k, 0.1)[0].imag()), 0.0, 1e-15);
  EXPECT_GT(std::abs(wf::decoupled_poles(0.9, 0.002, 1.001 * k, 0.1)[0].imag()), 0.0);
}

TEST(SpectrumOutput, CsvHasOneRowPerEigenvalue) {
  const auto verdicts = wf::sweep_patterns(0.9, 0.002, 0.5, 0.1, 2, {});
  const auto path = std::filesystem::temp_directory_path() / "windfarm_spectrum.csv";
  wf::write_spectrum_csv(verdicts, path);
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1U + 3U * 4U);
  std::filesystem::remove(path);

  const std::string report = wf::format_spectrum_report(verdicts, 0.9, 0.002, 0.5, 0.1);
  EXPECT_NE(report.find("stable_patterns = 3/3"), std::string::npos);
}
