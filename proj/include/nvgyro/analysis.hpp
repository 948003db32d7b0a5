#ifndef NVGYRO_ANALYSIS_HPP
#define NVGYRO_ANALYSIS_HPP

// Allan deviation of block series, rotation-rate rescaling and comparison of
// stability curves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nvgyro/error.hpp"

namespace nvgyro {

/// bin_average: sigma^2 = 1/2 <(ybar_{k+1} - ybar_k)^2> on bin means.
/// rate: the same with each difference divided by tau.
enum class AllanConvention { bin_average, rate };

struct AllanOptions {
  AllanConvention convention = AllanConvention::bin_average;
  bool overlapping = false;
};

struct AllanPoint {
  double tau = 0.0;            // s
  double sigma = 0.0;          // signal units
  double error = 0.0;          // sigma / sqrt(number of differences)
  std::size_t n_subdivisions = 0;
  double sigma_rotation = std::numeric_limits<double>::quiet_NaN();  // deg/s
};

struct AllanCurve {
  std::vector<AllanPoint> points;
  double scale_factor_s = 0.0;  // (deg/s)^-1; zero when not rescaled
  double sample_interval = 0.0;
  double duration = 0.0;
  std::vector<std::string> warnings;

  std::vector<double> taus() const {
    std::vector<double> t;
    for (const auto& p : points) t.push_back(p.tau);
    return t;
  }
};

/// Log-spaced taus (per_decade points per decade) snapped to multiples of dt,
/// from dt up to a third of the series length.
inline std::vector<double> default_tau_grid(std::size_t n, double dt, int per_decade = 10) {
  std::vector<double> taus;
  const std::size_t max_m = n / 3;
  std::size_t last = 0;
  for (int k = 0;; ++k) {
    const auto m = static_cast<std::size_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
    if (m > max_m) break;
    if (m != last) taus.push_back(static_cast<double>(m) * dt);
    last = m;
  }
  return taus;
}

/// Allan deviation of a uniformly sampled series (sampling interval dt).
///
/// Each tau is snapped to the nearest multiple m of dt. Points that would use
/// fewer than three bins are omitted and reported in `warnings`.
inline AllanCurve allan_deviation(std::span<const double> values, double dt,
                                  std::span<const double> taus, const AllanOptions& opt = {}) {
  if (values.empty()) throw InvalidArgument("allan_deviation: empty series");
  if (!(dt > 0.0)) throw InvalidArgument("allan_deviation: sampling interval must be positive");
  const std::size_t n = values.size();

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];

  AllanCurve curve;
  curve.sample_interval = dt;
  curve.duration = static_cast<double>(n) * dt;
  std::size_t previous_m = 0;
  for (double tau : taus) {
    const auto m = static_cast<std::size_t>(std::max<long long>(1, std::llround(tau / dt)));
    if (m == previous_m) continue;
    const std::size_t bins = n / m;
    if (bins < 3) {
      curve.warnings.push_back("tau " + std::to_string(tau) + " s omitted: fewer than 3 subdivisions");
      continue;
    }
    previous_m = m;
    const double tau_eff = static_cast<double>(m) * dt;
    const double scale = opt.convention == AllanConvention::rate ? 1.0 / tau_eff : 1.0;
    const auto mean_at = [&](std::size_t start) {
      return (prefix[start + m] - prefix[start]) / static_cast<double>(m);
    };
    double ss = 0.0;
    std::size_t count = 0;
    if (opt.overlapping) {
      for (std::size_t s = 0; s + 2 * m <= n; ++s, ++count) {
        const double d = (mean_at(s + m) - mean_at(s)) * scale;
        ss += d * d;
      }
    } else {
      for (std::size_t k = 0; k + 1 < bins; ++k, ++count) {
        const double d = (mean_at((k + 1) * m) - mean_at(k * m)) * scale;
        ss += d * d;
      }
    }
    AllanPoint pt;
    pt.tau = tau_eff;
    pt.sigma = std::sqrt(0.5 * ss / static_cast<double>(count));
    // Overlapping differences are not independent; the error bar counts bins.
    const std::size_t independent = opt.overlapping ? bins - 1 : count;
    pt.error = pt.sigma / std::sqrt(static_cast<double>(independent));
    pt.n_subdivisions = bins;
    curve.points.push_back(pt);
  }
  return curve;
}

/// Allan deviation of a (time, value) series. Block index is the time base;
/// tau labels use the mean sample spacing.
inline AllanCurve allan_deviation(std::span<const std::pair<double, double>> series,
                                  std::span<const double> taus, const AllanOptions& opt = {}) {
  if (series.empty()) throw InvalidArgument("allan_deviation: empty series");
  if (series.size() < 2) throw InvalidArgument("allan_deviation: need at least two samples");
  std::vector<double> values;
  values.reserve(series.size());
  for (const auto& [t, v] : series) values.push_back(v);
  const double dt = (series.back().first - series.front().first) / static_cast<double>(series.size() - 1);
  return allan_deviation(values, dt, taus, opt);
}

/// Attaches the rotation-rate axis sigma / s (deg/s).
inline AllanCurve rescale_to_rotation(AllanCurve curve, double s) {
  if (!(s > 0.0)) throw InvalidArgument("rescale_to_rotation: scale factor must be positive");
  curve.scale_factor_s = s;
  for (auto& p : curve.points) p.sigma_rotation = p.sigma / s;
  return curve;
}

/// Least-squares slope of log sigma against log tau over [tau_lo, tau_hi].
inline double loglog_slope(const AllanCurve& curve, double tau_lo, double tau_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& p : curve.points) {
    if (p.tau < tau_lo || p.tau > tau_hi || !(p.sigma > 0)) continue;
    const double x = std::log(p.tau), y = std::log(p.sigma);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  if (n < 2) throw InvalidArgument("loglog_slope: fewer than two points in range");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// Amplitude A of the sqrt law A / sqrt(tau) fitted in log space to every
/// point with positive sigma. Points are weighted by (sigma / error)^2, the
/// inverse variance of log sigma, so sparse long-tau points cannot bias it.
inline double sqrt_law_fit(const AllanCurve& curve) {
  double sum = 0.0, wsum = 0.0;
  for (const auto& p : curve.points) {
    if (!(p.sigma > 0)) continue;
    const double w = p.error > 0 ? (p.sigma / p.error) * (p.sigma / p.error) : 1.0;
    sum += w * std::log(p.sigma * std::sqrt(p.tau));
    wsum += w;
  }
  if (wsum == 0) throw InvalidArgument("sqrt_law_fit: no positive points");
  return std::exp(sum / wsum);
}

enum class FeatureKind { none, excess, slope_change };

struct PeriodicFeature {
  FeatureKind kind = FeatureKind::none;
  double tau = 0.0;
  double excess_in_error_bars = 0.0;  // largest (sigma - sqrt law) / error in the window

  bool found() const { return kind != FeatureKind::none; }
};

/// Looks for the signature of a periodic perturbation of the given period at
/// tau in [lo * period, hi * period]:
///  - a local extremum, i.e. a sign change of the local log-log slope where
///    both adjacent steps exceed `threshold` combined error bars, or
///  - a point above the fitted sqrt law by at least `threshold` error bars.
/// The slope change takes precedence when both are present.
inline PeriodicFeature find_periodic_feature(const AllanCurve& curve, double period,
                                             double lo = 0.5, double hi = 2.0,
                                             double threshold = 2.0) {
  PeriodicFeature out;
  const auto& pts = curve.points;
  if (pts.empty()) return out;
  const auto in_window = [&](double tau) { return tau >= lo * period && tau <= hi * period; };
  const auto significant = [&](const AllanPoint& a, const AllanPoint& b) {
    return std::abs(b.sigma - a.sigma) >= threshold * std::hypot(a.error, b.error);
  };

  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (!in_window(pts[i].tau)) continue;
    const bool up_before = pts[i].sigma > pts[i - 1].sigma;
    const bool up_after = pts[i + 1].sigma > pts[i].sigma;
    if (up_before != up_after && significant(pts[i - 1], pts[i]) && significant(pts[i], pts[i + 1])) {
      out.kind = FeatureKind::slope_change;
      out.tau = pts[i].tau;
      break;
    }
  }

  const double amp = sqrt_law_fit(curve);
  double best = -std::numeric_limits<double>::infinity();
  double best_tau = 0.0;
  for (const auto& p : pts) {
    if (!in_window(p.tau) || !(p.error > 0)) continue;
    const double z = (p.sigma - amp / std::sqrt(p.tau)) / p.error;
    if (z > best) best = z, best_tau = p.tau;
  }
  out.excess_in_error_bars = std::isfinite(best) ? best : 0.0;
  if (out.kind == FeatureKind::none && best >= threshold) {
    out.kind = FeatureKind::excess;
    out.tau = best_tau;
  }
  return out;
}

struct OrderingCheck {
  double tau = 0.0;
  std::vector<double> sigma;  // one per curve, at tau
  bool ascending = false;     // sigma strictly increasing in curve order
};

/// Compares curves (sharing a tau grid) at the tau in [lo * period,
/// hi * period] where curve `reference` is largest, i.e. where the
/// perturbation signature of that curve peaks.
inline OrderingCheck ordering_at_period(const std::vector<AllanCurve>& curves, std::size_t reference,
                                        double period, double lo = 0.5, double hi = 2.0) {
  if (curves.empty() || reference >= curves.size()) throw InvalidArgument("ordering: bad reference curve");
  const auto& ref = curves[reference].points;
  std::optional<std::size_t> at;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].tau < lo * period || ref[i].tau > hi * period) continue;
    if (!at || ref[i].sigma > ref[*at].sigma) at = i;
  }
  if (!at) throw InvalidArgument("ordering: no tau within the window around the period");
  OrderingCheck out;
  out.tau = ref[*at].tau;
  out.ascending = true;
  for (const auto& c : curves) {
    if (c.points.size() != ref.size() || std::abs(c.points[*at].tau - out.tau) > 1e-9 * out.tau) {
      throw InvalidArgument("ordering: tau grids differ");
    }
    if (!out.sigma.empty() && !(c.points[*at].sigma > out.sigma.back())) out.ascending = false;
    out.sigma.push_back(c.points[*at].sigma);
  }
  return out;
}

struct StabilityReport {
  std::vector<double> taus;
  std::vector<double> improvement;  // sigma_uncorrected / sigma_corrected
  double optimum_tau = 0.0;         // argmin of the corrected curve
  double optimum_sigma = 0.0;
  double white_slope = 0.0;         // corrected log-log slope over the white region
  bool deviates_from_sqrt_law = false;
};

struct WhiteRegion {
  double tau_lo = 0.0;
  double tau_hi = std::numeric_limits<double>::infinity();
};

inline bool same_tau_grid(const AllanCurve& a, const AllanCurve& b) {
  if (a.points.size() != b.points.size()) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const double x = a.points[i].tau, y = b.points[i].tau;
    if (std::abs(x - y) > 1e-9 * std::max(std::abs(x), std::abs(y))) return false;
  }
  return true;
}

/// Compares an uncorrected and a corrected curve on a shared tau grid.
/// The sqrt-law flag is raised when the corrected slope over `white` differs
/// from -1/2 by more than 0.1.
inline StabilityReport stability_report(const AllanCurve& uncorrected, const AllanCurve& corrected,
                                        const WhiteRegion& white = {}) {
  if (!same_tau_grid(uncorrected, corrected)) throw InvalidArgument("stability_report: tau grids differ");
  if (corrected.points.empty()) throw InvalidArgument("stability_report: empty curves");
  StabilityReport r;
  for (std::size_t i = 0; i < corrected.points.size(); ++i) {
    const auto& u = uncorrected.points[i];
    const auto& c = corrected.points[i];
    r.taus.push_back(c.tau);
    r.improvement.push_back(c.sigma > 0 ? u.sigma / c.sigma
                                        : (u.sigma > 0 ? std::numeric_limits<double>::infinity() : 1.0));
  }
  const auto best = std::min_element(corrected.points.begin(), corrected.points.end(),
                                     [](const auto& a, const auto& b) { return a.sigma < b.sigma; });
  r.optimum_tau = best->tau;
  r.optimum_sigma = best->sigma;
  const double hi = std::isfinite(white.tau_hi) ? white.tau_hi : corrected.points.back().tau;
  r.white_slope = loglog_slope(corrected, white.tau_lo, hi);
  r.deviates_from_sqrt_law = std::abs(r.white_slope + 0.5) > 0.1;
  return r;
}

}  // namespace nvgyro

#endif
