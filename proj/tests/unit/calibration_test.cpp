#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "nvgyro/calibration.hpp"

using namespace nvgyro;

namespace {

TEST(FitSinusoid, RecoversParameters) {
  std::vector<double> th, y;
  for (int i = 0; i < 36; ++i) {
    th.push_back(2 * std::numbers::pi * i / 36);
    y.push_back(0.1 + 0.3 * std::sin(th.back() + 0.4));
  }
  const auto f = fit_sinusoid(th, y);
  EXPECT_NEAR(f.amplitude, 0.3, 1e-12);
  EXPECT_NEAR(f.phase, 0.4, 1e-12);
  EXPECT_NEAR(f.offset, 0.1, 1e-12);
  EXPECT_LT(f.rms_residual, 1e-12);
}

TEST(FitSinusoid, RejectsNonSinusoidalData) {
  std::vector<double> th, y;
  for (int i = 0; i < 36; ++i) {
    th.push_back(2 * std::numbers::pi * i / 36);
    y.push_back(i % 2 ? 1.0 : -1.0);
  }
  EXPECT_THROW(fit_sinusoid(th, y), FitError);
  const std::vector<double> three{0.0, 1.0, 2.0};
  EXPECT_THROW(fit_sinusoid(three, three), FitError);
  const std::vector<double> flat(36, 0.5);
  EXPECT_THROW(fit_sinusoid(th, flat), FitError);
}

TEST(SlopeCalibration, NoiselessSweepMatchesAnalyticSlope) {
  const SensorParams p;
  SequenceConfig s;
  for (bool mapped : {true, false}) {
    s.use_mapping = mapped;
    const auto cal = slope_calibration(p, s);
    // F = -C' cos(theta + pi/2) / (1 - ...) reduces to C' sin(theta) at the
    // balanced bias, C' = C exp(-t / T2*): dF/dOmega = C' t pi / 180.
    const double c_eff = (mapped ? p.mapped_contrast : p.unmapped_contrast()) * std::exp(-s.t_ramsey / p.t2n_star);
    EXPECT_NEAR(cal.slope / (c_eff * s.t_ramsey * std::numbers::pi / 180), 1.0, 1e-9);
    EXPECT_EQ(cal.scale_factor_s, std::abs(cal.slope));
  }
}

TEST(SlopeCalibration, MappedOverUnmappedRatioIsTheContrastGain) {
  const SensorParams p;
  SequenceConfig s;
  const double f = slope_calibration(p, s).scale_factor_s;
  s.use_mapping = false;
  const double g = slope_calibration(p, s).scale_factor_s;
  EXPECT_NEAR(f / g, p.mapping_contrast_gain, 1e-9);
}

TEST(PhaseSweep, SpansOnePeriod) {
  const auto sw = phase_sweep(SensorParams{}, SequenceConfig{}, 12);
  ASSERT_EQ(sw.theta.size(), 12u);
  EXPECT_EQ(sw.theta.front(), 0.0);
  EXPECT_NEAR(sw.theta.back(), 2 * std::numbers::pi * 11 / 12, 1e-15);
  EXPECT_NEAR(sw.contrast.front(), 0.0, 1e-15);
  EXPECT_THROW(phase_sweep(SensorParams{}, SequenceConfig{}, 3), InvalidArgument);
}

TEST(SensitivityRun, NuclearPresetNearThreeThousand) {
  SensitivityRunConfig cfg;
  cfg.sequence = quarter_minute_timing(cfg.sequence);
  const auto r = sensitivity_run(cfg);
  EXPECT_GT(r.report.eta, 1500.0);
  EXPECT_LT(r.report.eta, 6000.0);
  EXPECT_EQ(r.contrast.size(), 200u);
}

}  // namespace
