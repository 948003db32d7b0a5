#ifndef NVGYRO_PROTOCOL_HPP
#define NVGYRO_PROTOCOL_HPP

// Six-measurement interleaved acquisition: Ramsey at +90 deg, ESR at nu4 and
// nu3, Ramsey at -90 deg, ESR at nu1 and nu2, repeated n_r times per block.
// Blocks are separated by a dead time during which the controller updates the
// drive frequencies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvgyro/control.hpp"
#include "nvgyro/environment.hpp"
#include "nvgyro/error.hpp"
#include "nvgyro/estimation.hpp"
#include "nvgyro/spin_model.hpp"

namespace nvgyro {

struct SequenceConfig {
  double t_ramsey = 600e-6;                  // s
  double theta_plus = std::numbers::pi / 2;  // rad
  double theta_minus = -std::numbers::pi / 2;
  std::array<double, 4> esr_offsets{-700e3, -350e3, 350e3, 700e3};  // Hz
  int n_r = 2000;
  double block_dead_time = 50.0;  // s
  double sequence_length = 1e-3;  // s
  bool use_mapping = true;
  double emulated_rotation = 0.0;  // deg/s
  double ramsey_detuning = 0.0;    // Hz, programmed drive detuning
  Spin sensing_spin = Spin::nuclear;

  double acquisition_time() const { return n_r * sequence_length; }
  double block_period() const { return acquisition_time() + block_dead_time; }

  void validate() const {
    using detail::require;
    require(t_ramsey > 0, "t_ramsey must be positive");
    require(n_r >= 1, "n_r must be at least 1");
    require(block_dead_time > 0, "block_dead_time must be positive");
    require(sequence_length > 0, "sequence_length must be positive");
    for (std::size_t i = 1; i < esr_offsets.size(); ++i) {
      require(esr_offsets[i] > esr_offsets[i - 1], "esr_offsets must be strictly increasing");
    }
  }
};

/// Dead time giving one block per minute (50 s update step).
inline SequenceConfig minute_timing(SequenceConfig c) {
  c.block_dead_time = 60.0 - c.acquisition_time();
  return c;
}

/// Dead time giving 25 s per block including the update step.
inline SequenceConfig quarter_minute_timing(SequenceConfig c) {
  c.block_dead_time = 25.0 - c.acquisition_time();
  return c;
}

/// Block-averaged outputs of one acquisition block.
struct AcquisitionRecord {
  double t_start = 0.0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  std::array<double, 4> esr_samples{};
  std::array<double, 4> probe_frequencies{};  // Hz
  double mapping_frequency = 0.0;             // Hz
  double nuclear_drive = 0.0;                 // Hz
  int n_averaged = 0;
  bool mapped = true;

  FourPointReading four_point() const { return {probe_frequencies, esr_samples}; }
};

/// (S90 - S-90) / (S90 + S-90). Throws DataError when the sum is not positive.
inline double contrast_F(double s_plus, double s_minus) {
  const double sum = s_plus + s_minus;
  if (!(sum > 0.0)) throw DataError("degenerate Ramsey signals: S90 + S-90 <= 0");
  return (s_plus - s_minus) / sum;
}

/// Same quotient from the unmapped readout S'.
inline double contrast_G(double s_plus_raw, double s_minus_raw) {
  return contrast_F(s_plus_raw, s_minus_raw);
}

/// Contrast of a record: F when mapped, G otherwise.
inline double record_contrast(const AcquisitionRecord& r) {
  return r.mapped ? contrast_F(r.s_plus, r.s_minus) : contrast_G(r.s_plus, r.s_minus);
}

/// Runs acquisition blocks for one channel. Owns the readout noise stream.
class Acquisition {
 public:
  Acquisition(const SensorParams& params, const SequenceConfig& config,
              const FieldTrajectory& trajectory, const NoiseModel& noise, std::uint64_t seed)
      : params_(params), config_(config), trajectory_(trajectory), noise_(noise), rng_(seed) {
    params_.validate();
    config_.validate();
    noise_.validate();
  }

  const SequenceConfig& config() const { return config_; }

  /// Simulates n_r repetitions starting at t_start with the frequencies held
  /// in `feedback`. The field is sampled once per repetition.
  AcquisitionRecord run_block(const FeedbackState& feedback, double t_start) {
    if (last_start_ && !(t_start > *last_start_)) {
      throw SchedulingError("block start times must be strictly increasing");
    }
    last_start_ = t_start;

    const auto& p = params_;
    const auto& c = config_;
    const bool nuclear = c.sensing_spin == Spin::nuclear;
    const bool mapped = nuclear && c.use_mapping;
    const RamseyChannel base = ramsey_channel(c.sensing_spin, p, mapped);
    const double rotation_phase = c.emulated_rotation * kDegToRad * c.t_ramsey;
    const double theta_plus = c.theta_plus + rotation_phase;
    const double theta_minus = c.theta_minus + rotation_phase;

    AcquisitionRecord rec;
    rec.t_start = t_start;
    rec.mapped = mapped;
    rec.n_averaged = c.n_r;
    for (std::size_t j = 0; j < 4; ++j) rec.probe_frequencies[j] = feedback.esr_center + c.esr_offsets[j];
    rec.mapping_frequency = p.nu_e + feedback.mapping_correction;
    rec.nuclear_drive = p.nu_n + feedback.nuclear_correction;

    double sum_plus = 0.0;
    double sum_minus = 0.0;
    std::array<double, 4> sum_esr{};
    for (int r = 0; r < c.n_r; ++r) {
      const double t = t_start + r * c.sequence_length;
      const double db = trajectory_.field_at(t);
      // The m_S = 0 -> -1 lines move down with field below the ground-state
      // anticrossing; the nuclear transition moves up by gamma_n db.
      const double line_shift = -p.gamma_e * db;
      RamseyChannel channel = base;
      double phase;
      if (nuclear) {
        phase = kTwoPi * (p.gamma_n * db - feedback.nuclear_correction) * c.t_ramsey;
        if (mapped) channel.contrast *= mapping_fidelity(line_shift - feedback.mapping_correction, p);
      } else {
        phase = kTwoPi * line_shift * c.t_ramsey;
      }
      sum_plus += sample_readout(
          ramsey_signal(channel, theta_plus, c.t_ramsey, phase, c.ramsey_detuning), noise_, rng_);
      // ESR half of the sequence at nu4, nu3.
      for (std::size_t j : {3u, 2u}) {
        sum_esr[j] += sample_readout(esr_spectrum(rec.probe_frequencies[j], line_shift, p), noise_, rng_);
      }
      sum_minus += sample_readout(
          ramsey_signal(channel, theta_minus, c.t_ramsey, phase, c.ramsey_detuning), noise_, rng_);
      for (std::size_t j : {0u, 1u}) {
        sum_esr[j] += sample_readout(esr_spectrum(rec.probe_frequencies[j], line_shift, p), noise_, rng_);
      }
    }
    const double n = static_cast<double>(c.n_r);
    rec.s_plus = sum_plus / n;
    rec.s_minus = sum_minus / n;
    for (std::size_t j = 0; j < 4; ++j) rec.esr_samples[j] = sum_esr[j] / n;
    return rec;
  }

 private:
  SensorParams params_;
  SequenceConfig config_;
  const FieldTrajectory& trajectory_;
  NoiseModel noise_;
  Rng rng_;
  std::optional<double> last_start_;
};

/// What a channel does with the shared line-center estimate between blocks.
struct Controller {
  bool track_probes = true;     // re-center the four ESR probes
  bool correct_mapping = false;  // re-center the mapping pulse
  double nuclear_gain = 0.0;    // cross-feedback gain g

  static Controller none() { return {false, false, 0.0}; }
};

struct ChannelSpec {
  std::string name;
  Controller controller;
};

struct ExperimentConfig {
  SensorParams sensor;
  SequenceConfig sequence;
  NoiseModel noise;
  std::vector<ChannelSpec> channels{{"main", {}}};
  double duration = 1e5;  // s
  std::uint64_t seed = 1;
  /// Line-center predictor: degree d on the last N estimates (N = 0 means d + 1).
  int predictor_degree = 0;
  std::size_t predictor_points = 0;
  std::size_t history_capacity = 64;
  double capture_range = 700e3;  // Hz
  double parallel_tolerance = 1e-3;
  /// true: channels share the clock and the tracker, one block each in turn.
  /// false: every channel runs alone over the whole duration on the same
  /// trajectory with its own tracker.
  bool interleave = true;

  void validate() const {
    sensor.validate();
    sequence.validate();
    noise.validate();
    using detail::require;
    require(!channels.empty(), "at least one channel is required");
    for (const auto& ch : channels) {
      require(!ch.name.empty(), "channel names must not be empty");
      require(ch.controller.track_probes ||
                  (!ch.controller.correct_mapping && ch.controller.nuclear_gain == 0.0),
              "channel '" + ch.name + "': corrections require probe tracking");
    }
    require(predictor_degree >= 0, "predictor degree must be non-negative");
    require(predictor_points == 0 || predictor_points >= static_cast<std::size_t>(predictor_degree) + 1,
            "predictor needs at least degree + 1 points");
    require(history_capacity >= std::max<std::size_t>(predictor_points, predictor_degree + 1),
            "history capacity smaller than the predictor window");
    require(capture_range >= 0 && parallel_tolerance >= 0, "out-of-band thresholds must be non-negative");
  }
};

/// One controller decision taken after a block.
struct FeedbackDecision {
  std::size_t block = 0;
  std::size_t channel = 0;
  double t_start = 0.0;
  bool in_band = false;
  double estimated_center = 0.0;  // Hz, NaN when out of band
  double next_center = 0.0;       // shared tracker target after this block, Hz
  double esr_center = 0.0;        // probe center used in this block, Hz
  double mapping_correction = 0.0;
  double nuclear_correction = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> channel_names;
  std::vector<std::vector<AcquisitionRecord>> records;  // per channel
  std::vector<FeedbackDecision> decisions;
  std::vector<FeedbackState> final_states;
  double end_time = 0.0;
  std::optional<std::string> error;  // set when the run aborted early
};

/// Per-channel readout stream seed.
inline std::uint64_t channel_seed(std::uint64_t seed, std::size_t channel) {
  return detail::splitmix64(detail::splitmix64(seed) + 0x632be59bd9b4e019ULL * (channel + 1));
}

namespace detail {

// Round-robin run over the channels in `channels`, appending to `out`.
inline void run_channels(const ExperimentConfig& cfg, const FieldTrajectory& trajectory,
                         const std::vector<std::size_t>& channels, ExperimentResult& out) {
  const SequenceConfig& seq = cfg.sequence;
  std::vector<Acquisition> acquisitions;
  acquisitions.reserve(channels.size());
  for (std::size_t c : channels) {
    acquisitions.emplace_back(cfg.sensor, seq, trajectory, cfg.noise, channel_seed(cfg.seed, c));
  }

  FourPointOptions fp;
  fp.nominal_slope = nominal_secant_slope(cfg.sensor, seq.esr_offsets);
  fp.parallel_tolerance = cfg.parallel_tolerance;
  fp.capture_range = cfg.capture_range;

  const double nominal = tracked_line_center(cfg.sensor);
  History tracker(cfg.history_capacity);
  double target = nominal;
  const std::size_t window =
      cfg.predictor_points > 0 ? cfg.predictor_points : static_cast<std::size_t>(cfg.predictor_degree) + 1;

  double t = 0.0;
  std::size_t turn = 0;
  while (t + seq.acquisition_time() <= cfg.duration) {
    const std::size_t slot = turn % channels.size();
    const std::size_t c = channels[slot];
    FeedbackState& state = out.final_states[c];
    const Controller& ctl = cfg.channels[c].controller;
    if (ctl.track_probes && target != state.esr_center) {
      state = update_nuclear(state, target - state.esr_center, cfg.sensor);
      state = ctl.correct_mapping ? update_mapping(state, target, t) : update_probes(state, target, t);
    }

    AcquisitionRecord rec = acquisitions[slot].run_block(state, t);

    FeedbackDecision d;
    d.block = out.records[c].size();
    d.channel = c;
    d.t_start = t;
    d.esr_center = state.esr_center;
    d.mapping_correction = state.mapping_correction;
    d.nuclear_correction = state.nuclear_correction;
    try {
      d.estimated_center = four_point_estimate(rec.four_point(), fp);
      d.in_band = true;
    } catch (const OutOfBandError&) {
      d.estimated_center = std::numeric_limits<double>::quiet_NaN();
    }
    if (d.in_band) {
      tracker.push(t, d.estimated_center - nominal);
      if (tracker.size() >= window) {
        const auto shifts = tracker.last_shifts(window);
        target = nominal + predict_next(shifts, cfg.predictor_degree);
      } else {
        target = d.estimated_center;
      }
    }
    d.next_center = target;

    out.records[c].push_back(rec);
    out.decisions.push_back(d);
    out.end_time = std::max(out.end_time, t + seq.acquisition_time());
    t += seq.block_period();
    ++turn;
  }
}

}  // namespace detail

/// Runs acquisition blocks and controller updates until the next block would
/// end after `duration`.
///
/// Each in-band four-point estimate is pushed into a line-center tracker; the
/// next target center is the polynomial prediction from the last N
/// estimates. Before its next block a channel re-centers its probes (and its
/// mapping pulse, when enabled) on the target and moves its nuclear drive by
/// g (-gamma_n / gamma_e) times the shift since its previous block.
///
/// Interleaved channels take turns on one clock and share the tracker. With
/// `interleave` off every channel gets a full-length run of its own. Block
/// numbers in the decisions count blocks of the same channel.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const FieldTrajectory& trajectory) {
  cfg.validate();
  if (cfg.duration < cfg.sequence.acquisition_time()) {
    throw InvalidArgument("duration shorter than one acquisition block");
  }

  ExperimentResult out;
  const std::size_t nch = cfg.channels.size();
  for (std::size_t c = 0; c < nch; ++c) {
    out.channel_names.push_back(cfg.channels[c].name);
    out.final_states.push_back(
        FeedbackState::initial(cfg.sensor, cfg.channels[c].controller.nuclear_gain, cfg.history_capacity));
  }
  out.records.resize(nch);

  try {
    if (cfg.interleave) {
      std::vector<std::size_t> all(nch);
      for (std::size_t c = 0; c < nch; ++c) all[c] = c;
      detail::run_channels(cfg, trajectory, all, out);
    } else {
      for (std::size_t c = 0; c < nch; ++c) detail::run_channels(cfg, trajectory, {c}, out);
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace nvgyro

#endif
