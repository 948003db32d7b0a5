#ifndef NVGYRO_ENVIRONMENT_HPP
#define NVGYRO_ENVIRONMENT_HPP

// Magnetic field b(t) along the NV axis, expressed as the deviation from the
// static bias field, plus the readout noise applied to every raw sample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "nvgyro/error.hpp"
#include "nvgyro/spin_model.hpp"

namespace nvgyro {

/// amplitude_pp / 2 * sin(2 pi t / period + phase)
struct Sinusoid {
  double amplitude_pp = 0.0;  // G
  double period = 1.0;        // s
  double phase = 0.0;         // rad
};

/// Wiener process with Var[b(t)] = diffusion * t.
struct RandomWalk {
  double diffusion = 0.0;  // G^2/s
};

/// Stationary Ornstein-Uhlenbeck process.
struct OrnsteinUhlenbeck {
  double sigma = 0.0;              // G
  double correlation_time = 1e4;  // s
};

struct ConstantField {
  double offset = 0.0;  // G
};

using FieldComponent = std::variant<Sinusoid, RandomWalk, OrnsteinUhlenbeck, ConstantField>;

struct TrajectorySpec {
  std::vector<FieldComponent> components;
  std::uint64_t seed = 0;
  double grid_step = 1.0;  // s, grid of the stochastic components
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based standard normal deviate keyed by (seed, stream, index).
inline double hashed_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
  const std::uint64_t g = splitmix64(h);
  // 53-bit uniforms, u1 in (0, 1].
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(g >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace detail

/// Immutable, seeded field trajectory.
///
/// Stochastic components live on a fixed grid with linear interpolation. Grid
/// increments are keyed by (seed, component index, step index), so values do
/// not depend on query order. Grid values up to `horizon` are tabulated at
/// construction; later times are extended on the fly from the last tabulated
/// point.
class FieldTrajectory {
 public:
  FieldTrajectory() = default;

  explicit FieldTrajectory(TrajectorySpec spec, double horizon = 0.0) : spec_(std::move(spec)) {
    detail::require(spec_.grid_step > 0, "grid_step must be positive");
    detail::require(horizon >= 0, "horizon must be non-negative");
    for (const auto& c : spec_.components) validate(c);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / spec_.grid_step)) + 2;
    tables_.resize(spec_.components.size());
    for (std::size_t i = 0; i < spec_.components.size(); ++i) {
      if (is_stochastic(spec_.components[i])) {
        auto& table = tables_[i];
        table.reserve(steps);
        table.push_back(initial_value(i));
        for (std::size_t k = 1; k < steps; ++k) table.push_back(advance(i, table.back(), k));
      }
    }
  }

  const TrajectorySpec& spec() const { return spec_; }

  /// Field deviation from the bias field at time t (G).
  double field_at(double t) const {
    double b = 0.0;
    for (std::size_t i = 0; i < spec_.components.size(); ++i) b += component_at(i, t);
    return b;
  }

  /// Contribution of a single component at time t (G).
  double component_at(std::size_t index, double t) const {
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Sinusoid>) {
            return 0.5 * c.amplitude_pp * std::sin(kTwoPi * t / c.period + c.phase);
          } else if constexpr (std::is_same_v<T, ConstantField>) {
            return c.offset;
          } else {
            return grid_value(index, t);
          }
        },
        spec_.components[index]);
  }

 private:
  static bool is_stochastic(const FieldComponent& c) {
    return std::holds_alternative<RandomWalk>(c) || std::holds_alternative<OrnsteinUhlenbeck>(c);
  }

  static void validate(const FieldComponent& c) {
    std::visit(
        [](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Sinusoid>) {
            detail::require(v.period > 0, "sinusoid period must be positive");
          } else if constexpr (std::is_same_v<T, RandomWalk>) {
            detail::require(v.diffusion >= 0, "random walk diffusion must be non-negative");
          } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
            detail::require(v.sigma >= 0, "OU sigma must be non-negative");
            detail::require(v.correlation_time > 0, "OU correlation time must be positive");
          }
        },
        c);
  }

  double noise(std::size_t index, std::size_t step) const {
    return detail::hashed_normal(spec_.seed, index, step);
  }

  double initial_value(std::size_t index) const {
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec_.components[index])) {
      return ou->sigma * noise(index, 0);
    }
    return 0.0;
  }

  // Value at grid step k given the value at step k - 1.
  double advance(std::size_t index, double previous, std::size_t k) const {
    const double dt = spec_.grid_step;
    if (const auto* rw = std::get_if<RandomWalk>(&spec_.components[index])) {
      return previous + std::sqrt(rw->diffusion * dt) * noise(index, k);
    }
    const auto& ou = std::get<OrnsteinUhlenbeck>(spec_.components[index]);
    const double a = std::exp(-dt / ou.correlation_time);
    return a * previous + ou.sigma * std::sqrt(1.0 - a * a) * noise(index, k);
  }

  double grid_point(std::size_t index, std::size_t k) const {
    const auto& table = tables_[index];
    if (k < table.size()) return table[k];
    double v = table.back();
    for (std::size_t j = table.size(); j <= k; ++j) v = advance(index, v, j);
    return v;
  }

  double grid_value(std::size_t index, double t) const {
    const double x = t / spec_.grid_step;
    const auto k = static_cast<std::size_t>(std::floor(x));
    const double frac = x - static_cast<double>(k);
    const double lo = grid_point(index, k);
    if (frac == 0.0) return lo;
    return lo + frac * (grid_point(index, k + 1) - lo);
  }

  TrajectorySpec spec_;
  std::vector<std::vector<double>> tables_;
};

inline double field_at(const FieldTrajectory& trajectory, double t) { return trajectory.field_at(t); }

/// Collected photons per readout window at the measured rate of 5e13 photons/s.
inline constexpr double kPhotonRate = 5e13;
inline constexpr double kReadoutWindow = 30e-6;

struct NoiseModel {
  double readout_sigma = 0.0103;
  bool shot_noise_enabled = false;
  double photon_budget = kPhotonRate * kReadoutWindow;

  void validate() const {
    detail::require(readout_sigma >= 0, "readout_sigma must be non-negative");
    detail::require(photon_budget > 0, "photon_budget must be positive");
  }

  /// Standard deviation of one raw sample whose noiseless value is `signal`.
  double sigma_for(double signal) const {
    double var = readout_sigma * readout_sigma;
    if (shot_noise_enabled) var += std::max(signal, 0.0) / photon_budget;
    return std::sqrt(var);
  }
};

using Rng = std::mt19937_64;

/// Adds Gaussian readout (and optional shot) noise; the result is not clipped.
inline double sample_readout(double true_signal, const NoiseModel& noise, Rng& rng) {
  const double sigma = noise.sigma_for(true_signal);
  if (sigma == 0.0) return true_signal;
  std::normal_distribution<double> gauss(0.0, sigma);
  return true_signal + gauss(rng);
}

}  // namespace nvgyro

#endif
