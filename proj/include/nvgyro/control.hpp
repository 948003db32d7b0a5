#ifndef NVGYRO_CONTROL_HPP
#define NVGYRO_CONTROL_HPP

// Feedback controllers: mapping-pulse re-centering, cross-sensor nuclear drive
// correction and the history-based polynomial predictor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "nvgyro/error.hpp"
#include "nvgyro/spin_model.hpp"

namespace nvgyro {

struct HistoryEntry {
  double time;   // block start, s
  double shift;  // estimated line shift from the nominal center, Hz
};

/// Time-ordered ring buffer of line-shift estimates.
class History {
 public:
  explicit History(std::size_t capacity = 64) : capacity_(capacity) {
    detail::require(capacity > 0, "history capacity must be positive");
  }

  void push(double time, double shift) {
    if (!entries_.empty() && time < entries_.back().time) {
      throw SchedulingError("history entries must be time ordered");
    }
    entries_.push_back({time, shift});
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const HistoryEntry& back() const { return entries_.back(); }
  const std::deque<HistoryEntry>& entries() const { return entries_; }

  /// The last n shifts, oldest first.
  std::vector<double> last_shifts(std::size_t n) const {
    n = std::min(n, entries_.size());
    std::vector<double> out;
    out.reserve(n);
    for (auto it = entries_.end() - static_cast<std::ptrdiff_t>(n); it != entries_.end(); ++it) {
      out.push_back(it->shift);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<HistoryEntry> entries_;
};

/// Frequency bookkeeping of one acquisition channel.
struct FeedbackState {
  double nominal_center = 0.0;      // tracked line at the bias field, Hz
  double esr_center = 0.0;          // current probe-set center, Hz
  double mapping_correction = 0.0;  // mapping pulse offset from nu_e, Hz
  double nuclear_correction = 0.0;  // nuclear drive offset, Hz
  double gain = 0.0;                // cross-feedback gain
  History history{};

  static FeedbackState initial(const SensorParams& p, double gain = 0.0,
                               std::size_t history_capacity = 64) {
    FeedbackState s;
    s.nominal_center = tracked_line_center(p);
    s.esr_center = s.nominal_center;
    s.gain = gain;
    s.history = History(history_capacity);
    return s;
  }
};

/// Re-centers the probe set and the mapping pulse on `estimated_center`.
inline FeedbackState update_mapping(FeedbackState state, double estimated_center, double time) {
  state.history.push(time, estimated_center - state.nominal_center);
  state.esr_center = estimated_center;
  state.mapping_correction = estimated_center - state.nominal_center;
  return state;
}

/// Re-centers only the probe set; the mapping pulse keeps its frequency.
inline FeedbackState update_probes(FeedbackState state, double estimated_center, double time) {
  state.history.push(time, estimated_center - state.nominal_center);
  state.esr_center = estimated_center;
  return state;
}

/// Adds gain * (-gamma_n / gamma_e) * estimated_shift to the nuclear drive.
inline FeedbackState update_nuclear(FeedbackState state, double estimated_shift,
                                    const SensorParams& p) {
  state.nuclear_correction += state.gain * (-p.gamma_n / p.gamma_e) * estimated_shift;
  return state;
}

/// Weights w such that sum_i w_i y_i is the degree-d least-squares polynomial
/// through (i, y_i), i = 0..n-1, evaluated one step ahead at i = n.
inline std::vector<double> prediction_weights(std::size_t n, int degree) {
  if (degree < 0) throw InvalidArgument("polynomial degree must be non-negative");
  const auto cols = static_cast<std::size_t>(degree) + 1;
  if (n < cols) throw InvalidArgument("underdetermined fit: need at least degree + 1 points");
  // Abscissae rescaled to [-1, 0] with the prediction point at 1 / (n - 1).
  const double scale = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
  Eigen::MatrixXd v(n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) - static_cast<double>(n - 1)) * scale;
    double pw = 1.0;
    for (std::size_t j = 0; j < cols; ++j, pw *= u) v(i, j) = pw;
  }
  Eigen::RowVectorXd at(cols);
  double pw = 1.0;
  for (std::size_t j = 0; j < cols; ++j, pw *= scale) at(j) = pw;
  // w^T = at * (V^T V)^-1 V^T, computed through a QR solve.
  const Eigen::MatrixXd pinv = v.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::RowVectorXd w = at * pinv;
  return {w.data(), w.data() + w.size()};
}

/// One-step-ahead least-squares polynomial extrapolation of `history`.
inline double predict_next(std::span<const double> history, int degree) {
  const auto w = prediction_weights(history.size(), degree);
  double y = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) y += w[i] * history[i];
  return y;
}

struct PredictorStudyConfig {
  double perturbation_amplitude = 1.0;
  std::vector<double> noise_amplitudes{0.0, 0.1, 0.3, 1.0, 3.0, 10.0};
  std::vector<int> degrees{0, 1, 2, 3, 4, 5};
  int realizations = 20;
  double samples_per_period = 50.0;
  std::size_t trace_length = 1000;
  /// Fit window is degree + 1 + extra_points samples.
  std::size_t extra_points = 0;
  std::uint64_t seed = 1;
};

struct PredictorStudyResult {
  std::vector<double> noise_amplitudes;
  std::vector<int> degrees;
  /// mean_error[noise][degree], averaged over realizations.
  std::vector<std::vector<double>> mean_error;
  /// per_realization[noise][degree][r]: trace-mean |error| of one realization.
  std::vector<std::vector<std::vector<double>>> per_realization;
};

/// Mean |observed - predicted| along sinusoid + Gaussian noise traces, for
/// every (noise amplitude, degree) pair. Within a realization all degrees see
/// the same trace.
inline PredictorStudyResult predictor_study(const PredictorStudyConfig& cfg) {
  detail::require(cfg.realizations >= 1, "realizations must be at least 1");
  detail::require(cfg.samples_per_period > 0, "samples_per_period must be positive");
  PredictorStudyResult out;
  out.noise_amplitudes = cfg.noise_amplitudes;
  out.degrees = cfg.degrees;
  const std::size_t nn = cfg.noise_amplitudes.size();
  const std::size_t nd = cfg.degrees.size();
  out.mean_error.assign(nn, std::vector<double>(nd, 0.0));
  out.per_realization.assign(
      nn, std::vector<std::vector<double>>(nd, std::vector<double>(cfg.realizations, 0.0)));

  std::vector<std::vector<double>> weights;
  for (int d : cfg.degrees) {
    const std::size_t window = static_cast<std::size_t>(d) + 1 + cfg.extra_points;
    detail::require(window < cfg.trace_length, "trace too short for the fit window");
    weights.push_back(prediction_weights(window, d));
  }

  std::vector<double> trace(cfg.trace_length);
  for (std::size_t a = 0; a < nn; ++a) {
    for (int r = 0; r < cfg.realizations; ++r) {
      std::mt19937_64 rng(cfg.seed * 1000003ULL + a * 7919ULL + static_cast<std::uint64_t>(r));
      std::uniform_real_distribution<double> phase(0.0, kTwoPi);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double phi = phase(rng);
      for (std::size_t i = 0; i < trace.size(); ++i) {
        trace[i] = cfg.perturbation_amplitude *
                       std::sin(kTwoPi * static_cast<double>(i) / cfg.samples_per_period + phi) +
                   cfg.noise_amplitudes[a] * gauss(rng);
      }
      for (std::size_t k = 0; k < nd; ++k) {
        const auto& w = weights[k];
        double sum = 0.0;
        for (std::size_t i = w.size(); i < trace.size(); ++i) {
          double pred = 0.0;
          for (std::size_t j = 0; j < w.size(); ++j) pred += w[j] * trace[i - w.size() + j];
          sum += std::abs(trace[i] - pred);
        }
        const double m = sum / static_cast<double>(trace.size() - w.size());
        out.per_realization[a][k][r] = m;
        out.mean_error[a][k] += m / cfg.realizations;
      }
    }
  }
  return out;
}

struct PairedTest {
  double mean_difference;  // candidate - baseline
  double t_statistic;
  double p_value;          // two-sided
};

/// Paired two-sided t-test of per-realization errors of degree index
/// `candidate` against `baseline` at noise index `noise`.
inline PairedTest compare_degrees(const PredictorStudyResult& res, std::size_t noise,
                                  std::size_t candidate, std::size_t baseline) {
  const auto& a = res.per_realization.at(noise).at(candidate);
  const auto& b = res.per_realization.at(noise).at(baseline);
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("paired test needs at least two realizations");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  if (se == 0.0) return {mean, mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean), mean == 0.0 ? 1.0 : 0.0};
  const double t = mean / se;
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {mean, t, p};
}

}  // namespace nvgyro

#endif
