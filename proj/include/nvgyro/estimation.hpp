#ifndef NVGYRO_ESTIMATION_HPP
#define NVGYRO_ESTIMATION_HPP

// Four-point ESR line-center estimation and rotation-rate sensitivity.

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "nvgyro/error.hpp"
#include "nvgyro/spin_model.hpp"

namespace nvgyro {

/// Fluorescence sampled at four increasing probe frequencies.
struct FourPointReading {
  std::array<double, 4> frequencies{};  // Hz
  std::array<double, 4> signals{};

  void validate() const {
    for (std::size_t i = 1; i < 4; ++i) {
      if (!(frequencies[i] > frequencies[i - 1])) {
        throw InvalidArgument("four-point probe frequencies must be strictly increasing");
      }
    }
  }
};

/// Rejection thresholds for four_point_estimate.
struct FourPointOptions {
  /// Nominal in-band secant slope magnitude (fluorescence per Hz). Zero
  /// disables the near-parallel test.
  double nominal_slope = 0.0;
  /// Secant-slope difference below parallel_tolerance * nominal_slope is
  /// treated as out of band.
  double parallel_tolerance = 1e-3;
  /// Maximum distance between the estimate and the probe-set center (Hz).
  /// Zero disables the range test.
  double capture_range = 0.0;
};

/// Secant slope between the inner and outer probe of each side for an
/// unshifted line; the in-band reference used for the near-parallel test.
inline double nominal_secant_slope(const SensorParams& p, const std::array<double, 4>& offsets) {
  const double c = tracked_line_center(p);
  const double left = (esr_spectrum(c + offsets[1], 0.0, p) - esr_spectrum(c + offsets[0], 0.0, p)) /
                      (offsets[1] - offsets[0]);
  const double right = (esr_spectrum(c + offsets[3], 0.0, p) - esr_spectrum(c + offsets[2], 0.0, p)) /
                       (offsets[3] - offsets[2]);
  return 0.5 * (std::abs(left) + std::abs(right));
}

/// Abscissa of the intersection of the secant through points 1, 2 with the
/// secant through points 3, 4.
///
/// A fluorescence dip inside the capture band gives a falling left secant and
/// a rising right secant. Anything else (same-sign or near-parallel secants,
/// or an intersection farther than capture_range from the probe center)
/// throws OutOfBandError.
inline double four_point_estimate(const FourPointReading& r, const FourPointOptions& opt = {}) {
  r.validate();
  const auto& f = r.frequencies;
  const auto& s = r.signals;
  const double left = (s[1] - s[0]) / (f[1] - f[0]);
  const double right = (s[3] - s[2]) / (f[3] - f[2]);
  const double diff = left - right;
  if (!(left < 0.0 && right > 0.0)) {
    throw OutOfBandError("four-point secants do not straddle a dip (left slope " +
                         std::to_string(left) + ", right slope " + std::to_string(right) + ")");
  }
  if (opt.nominal_slope > 0.0 && std::abs(diff) < opt.parallel_tolerance * opt.nominal_slope) {
    throw OutOfBandError("four-point secants are near parallel");
  }
  // s[0] + left (x - f0) = s[2] + right (x - f2)
  const double x = (s[2] - s[0] + left * f[0] - right * f[2]) / diff;
  if (opt.capture_range > 0.0) {
    const double center = 0.5 * (f[1] + f[2]);
    if (std::abs(x - center) > opt.capture_range) {
      throw OutOfBandError("four-point estimate lies outside the capture range");
    }
  }
  return x;
}

/// Rotation-rate sensitivity eta = sigma_f sqrt(T) / |dS/dOmega|.
struct SensitivityReport {
  double eta;      // deg s^-1 / sqrt(Hz)
  double sigma_f;  // standard error of the series
  double slope;    // per (deg/s)
  double t_total;  // s
};

/// `t_total` is the acquisition time spanned by the whole series.
inline SensitivityReport sensitivity(std::span<const double> series, double t_total,
                                     double slope) {
  if (series.size() < 2) throw InvalidArgument("sensitivity needs at least two samples");
  if (slope == 0.0 || !std::isfinite(slope)) throw InvalidArgument("uncalibrated: zero slope");
  if (!(t_total > 0.0)) throw InvalidArgument("total acquisition time must be positive");
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double sigma_f = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {sigma_f * std::sqrt(t_total) / std::abs(slope), sigma_f, slope, t_total};
}

}  // namespace nvgyro

#endif
