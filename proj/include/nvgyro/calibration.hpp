#ifndef NVGYRO_CALIBRATION_HPP
#define NVGYRO_CALIBRATION_HPP

// Phase-sweep slope calibration of the contrast signal and rotation-rate
// sensitivity runs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nvgyro/environment.hpp"
#include "nvgyro/error.hpp"
#include "nvgyro/estimation.hpp"
#include "nvgyro/protocol.hpp"
#include "nvgyro/spin_model.hpp"

namespace nvgyro {

/// y = offset + amplitude * sin(theta + phase)
struct SinusoidFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double rms_residual = 0.0;
};

/// Linear least-squares fit of a + b cos(theta) + c sin(theta). Throws
/// FitError when there are fewer than four points, when the amplitude
/// vanishes, or when the RMS residual exceeds `max_relative_residual` times
/// the amplitude.
inline SinusoidFit fit_sinusoid(std::span<const double> theta, std::span<const double> y,
                                double max_relative_residual = 0.05) {
  if (theta.size() != y.size()) throw InvalidArgument("fit_sinusoid: size mismatch");
  const auto n = static_cast<Eigen::Index>(theta.size());
  if (n < 4) throw FitError("fit_sinusoid: need at least four points");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(theta[i]);
    a(i, 2) = std::sin(theta[i]);
    b(i) = y[i];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  SinusoidFit fit;
  fit.offset = x(0);
  fit.amplitude = std::hypot(x(1), x(2));
  fit.phase = std::atan2(x(1), x(2));
  fit.rms_residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(n));
  if (!(fit.amplitude > 0.0) || !std::isfinite(fit.amplitude)) {
    throw FitError("fit_sinusoid: no sinusoidal component");
  }
  if (fit.rms_residual > max_relative_residual * fit.amplitude) {
    throw FitError("fit_sinusoid: data is not sinusoidal (residual " + std::to_string(fit.rms_residual) +
                   ", amplitude " + std::to_string(fit.amplitude) + ")");
  }
  return fit;
}

struct PhaseSweep {
  std::vector<double> theta;     // rad, added to both final-pulse phases
  std::vector<double> contrast;  // F (mapped) or G (unmapped)
};

/// Noiseless contrast against a common final-pulse phase offset in a quiet
/// field, `points` samples over one period.
inline PhaseSweep phase_sweep(const SensorParams& p, const SequenceConfig& c, int points = 72) {
  detail::require(points >= 4, "phase sweep needs at least four points");
  const bool nuclear = c.sensing_spin == Spin::nuclear;
  const RamseyChannel ch = ramsey_channel(c.sensing_spin, p, nuclear && c.use_mapping);
  PhaseSweep out;
  for (int i = 0; i < points; ++i) {
    const double th = kTwoPi * i / points;
    const double sp = ramsey_signal(ch, c.theta_plus + th, c.t_ramsey, 0.0, c.ramsey_detuning);
    const double sm = ramsey_signal(ch, c.theta_minus + th, c.t_ramsey, 0.0, c.ramsey_detuning);
    out.theta.push_back(th);
    out.contrast.push_back(contrast_F(sp, sm));
  }
  return out;
}

struct SlopeCalibration {
  double slope = 0.0;           // max dF/dOmega, per (deg/s)
  double scale_factor_s = 0.0;  // |slope|, (deg/s)^-1
  SinusoidFit fit;
};

/// Fits a phase sweep and converts the steepest slope dF/dtheta into
/// dF/dOmega = dF/dtheta * t_ramsey * pi / 180.
inline SlopeCalibration slope_calibration(std::span<const double> theta, std::span<const double> contrast,
                                          double t_ramsey) {
  SlopeCalibration cal;
  cal.fit = fit_sinusoid(theta, contrast);
  cal.slope = cal.fit.amplitude * t_ramsey * kDegToRad;
  cal.scale_factor_s = std::abs(cal.slope);
  return cal;
}

inline SlopeCalibration slope_calibration(const SensorParams& p, const SequenceConfig& c) {
  const PhaseSweep sweep = phase_sweep(p, c);
  return slope_calibration(sweep.theta, sweep.contrast, c.t_ramsey);
}

struct SensitivityRunConfig {
  SensorParams sensor;
  SequenceConfig sequence;
  NoiseModel noise;
  int blocks = 200;
  std::uint64_t seed = 1;
};

struct SensitivityRun {
  SensitivityReport report;
  SlopeCalibration calibration;
  std::vector<double> contrast;  // per block
};

/// Runs `blocks` acquisition blocks in a quiet field and evaluates the
/// sensitivity of the block contrast series over the accumulated
/// acquisition time (dead time excluded).
inline SensitivityRun sensitivity_run(const SensitivityRunConfig& cfg) {
  detail::require(cfg.blocks >= 2, "sensitivity run needs at least two blocks");
  SensitivityRun out;
  out.calibration = slope_calibration(cfg.sensor, cfg.sequence);
  const FieldTrajectory quiet{};
  Acquisition acq(cfg.sensor, cfg.sequence, quiet, cfg.noise, cfg.seed);
  FeedbackState state = FeedbackState::initial(cfg.sensor);
  for (int b = 0; b < cfg.blocks; ++b) {
    const AcquisitionRecord rec = acq.run_block(state, b * cfg.sequence.block_period());
    out.contrast.push_back(record_contrast(rec));
  }
  const double t_total = cfg.blocks * cfg.sequence.acquisition_time();
  out.report = sensitivity(out.contrast, t_total, out.calibration.slope);
  return out;
}

}  // namespace nvgyro

#endif
