#ifndef NVGYRO_SPIN_MODEL_HPP
#define NVGYRO_SPIN_MODEL_HPP

// Analytic signal models for the NV electronic spin and the 14N nuclear spin:
// the hyperfine-split ESR lineshape, Ramsey fringes and the selective mapping
// pulse used for high-contrast nuclear readout.
//
// Frequencies are in Hz, times in seconds, fields in gauss, phases in radians.

#include <array>
#include <cmath>
#include <numbers>

#include "nvgyro/error.hpp"

namespace nvgyro {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

enum class Spin { electronic, nuclear };

/// Physical constants and calibration of both spin ensembles.
///
/// Three hyperfine lines of the m_S = 0 -> -1 transition sit at
/// nu_e + m_I * hyperfine_splitting for m_I in {-1, 0, +1}. The mapping pulse
/// addresses the m_I = 0 line (nu_e); the polarized m_I = +1 line is the one
/// tracked by four-point ESR.
struct SensorParams {
  double gamma_e = 2.8e6;               // Hz/G
  double gamma_n = 0.3e3;               // Hz/G
  double b0 = 420.0;                    // G
  double nu_e = 1.704e9;                // Hz
  double nu_n = 4.68e6;                 // Hz
  double t2e_star = 403e-9;             // s
  double t2n_star = 840e-6;             // s
  double esr_contrast = 0.03;
  double esr_linewidth = 1.6e6;         // FWHM, Hz
  double hyperfine_splitting = 2.16e6;  // Hz, literature value for 14N
  double nuclear_polarization = 0.95;
  double mapping_rabi = 100e3;          // Hz, square 5 us pi pulse
  double mapping_contrast_gain = 3.0;
  double mapped_contrast = 0.03;        // nuclear Ramsey contrast with mapping
  double electronic_contrast = 0.03;    // electronic Ramsey contrast

  double unmapped_contrast() const { return mapped_contrast / mapping_contrast_gain; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const {
    using detail::require;
    require(gamma_e > 0 && gamma_n > 0, "gyromagnetic ratios must be positive");
    require(b0 > 0, "bias field must be positive");
    require(nu_e > 0 && nu_n > 0, "resonance frequencies must be positive");
    require(t2e_star > 0 && t2n_star > 0, "dephasing times must be positive");
    require(esr_contrast > 0 && esr_contrast < 1, "esr_contrast must lie in (0, 1)");
    require(esr_linewidth > 0, "esr_linewidth must be positive");
    require(hyperfine_splitting > 0, "hyperfine_splitting must be positive");
    require(nuclear_polarization >= 0 && nuclear_polarization <= 1,
            "nuclear_polarization must lie in [0, 1]");
    require(mapping_rabi > 0, "mapping_rabi must be positive");
    require(mapping_contrast_gain > 0, "mapping_contrast_gain must be positive");
    require(mapped_contrast > 0 && mapped_contrast <= 1, "mapped_contrast must lie in (0, 1]");
    require(electronic_contrast > 0 && electronic_contrast <= 1,
            "electronic_contrast must lie in (0, 1]");
  }
};

/// One hyperfine ESR line: center frequency and population weight.
struct EsrLine {
  double center;
  double weight;
};

/// Lines ordered m_I = -1, 0, +1.
inline std::array<EsrLine, 3> esr_lines(const SensorParams& p) {
  const double minor = 0.5 * (1.0 - p.nuclear_polarization);
  return {{{p.nu_e - p.hyperfine_splitting, minor},
           {p.nu_e, minor},
           {p.nu_e + p.hyperfine_splitting, p.nuclear_polarization}}};
}

/// Center of the polarized (m_I = +1) line at the bias field.
inline double tracked_line_center(const SensorParams& p) { return p.nu_e + p.hyperfine_splitting; }

/// Unit-height Lorentzian with the given full width at half maximum.
inline double lorentzian(double detuning, double fwhm) {
  const double u = 2.0 * detuning / fwhm;
  return 1.0 / (1.0 + u * u);
}

/// Relative fluorescence of a pulsed ESR measurement at `freq` when every
/// line is shifted by `detuning_offset`. Lies in (1 - esr_contrast, 1].
inline double esr_spectrum(double freq, double detuning_offset, const SensorParams& p) {
  double dip = 0.0;
  for (const auto& line : esr_lines(p)) {
    dip += line.weight * lorentzian(freq - (line.center + detuning_offset), p.esr_linewidth);
  }
  return 1.0 - p.esr_contrast * dip;
}

/// Readout contrast and dephasing time of a Ramsey measurement channel.
struct RamseyChannel {
  double contrast;
  double t2_star;
};

inline RamseyChannel ramsey_channel(Spin spin, const SensorParams& p, bool mapped = true) {
  if (spin == Spin::electronic) return {p.electronic_contrast, p.t2e_star};
  return {mapped ? p.mapped_contrast : p.unmapped_contrast(), p.t2n_star};
}

/// Ramsey population signal
///   S = 1/2 [1 - C exp(-t/T2*) cos(2 pi detuning t + phase + theta)].
inline double ramsey_signal(const RamseyChannel& channel, double theta, double t, double phase,
                            double detuning = 0.0) {
  const double envelope = channel.contrast * std::exp(-t / channel.t2_star);
  return 0.5 * (1.0 - envelope * std::cos(theta + phase + kTwoPi * detuning * t));
}

inline double ramsey_signal(double theta, double t, double phase, Spin spin, const SensorParams& p,
                            bool mapped = true, double detuning = 0.0) {
  return ramsey_signal(ramsey_channel(spin, p, mapped), theta, t, phase, detuning);
}

/// Linear-response slope dS/dphase at the theta = pi/2 bias point.
inline double ramsey_bias_slope(const RamseyChannel& channel, double t) {
  return 0.5 * channel.contrast * std::exp(-t / channel.t2_star);
}

/// Population transferred by a square pi pulse (Rabi frequency Omega, both in
/// Hz) under detuning delta:
///   P = Omega^2 / (Omega^2 + delta^2) sin^2(pi sqrt(Omega^2 + delta^2) / (2 Omega)).
inline double mapping_fidelity(double pulse_detuning, double rabi) {
  const double r2 = rabi * rabi;
  const double eff2 = r2 + pulse_detuning * pulse_detuning;
  const double s = std::sin(std::numbers::pi * std::sqrt(eff2) / (2.0 * rabi));
  return r2 / eff2 * s * s;
}

inline double mapping_fidelity(double pulse_detuning, const SensorParams& p) {
  return mapping_fidelity(pulse_detuning, p.mapping_rabi);
}

}  // namespace nvgyro

#endif
