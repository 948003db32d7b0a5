#ifndef NVGYRO_RUN_HPP
#define NVGYRO_RUN_HPP

// Executes a RunConfig and writes its artifacts: records and Allan CSVs per
// channel, predictor grids, phase sweeps and a JSON manifest that embeds the
// full configuration text.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgyro/analysis.hpp"
#include "nvgyro/calibration.hpp"
#include "nvgyro/config.hpp"
#include "nvgyro/control.hpp"
#include "nvgyro/environment.hpp"
#include "nvgyro/io.hpp"
#include "nvgyro/protocol.hpp"

#ifndef NVGYRO_VERSION
#define NVGYRO_VERSION "0.0.0"
#endif

namespace nvgyro {

inline constexpr const char* kVersion = NVGYRO_VERSION;

/// Time between consecutive blocks of one channel (s).
inline double channel_interval(const ExperimentConfig& cfg) {
  const double p = cfg.sequence.block_period();
  return cfg.interleave ? p * static_cast<double>(cfg.channels.size()) : p;
}

/// Block series of one channel: "F" or "G" (the readout contrast, which must
/// match the channel's mapping mode), "esr_center" (four-point estimates,
/// out-of-band blocks skipped) or "auto" (F or G).
inline std::vector<double> channel_series(const ExperimentResult& res, std::size_t channel,
                                          const std::string& column) {
  std::vector<double> out;
  if (column == "esr_center") {
    for (const auto& d : res.decisions) {
      if (d.channel == channel && d.in_band) out.push_back(d.estimated_center);
    }
    return out;
  }
  for (const auto& r : res.records.at(channel)) {
    if ((column == "F" && !r.mapped) || (column == "G" && r.mapped)) {
      throw DataError("channel '" + res.channel_names.at(channel) + "' has no " + column + " column (" +
                      (r.mapped ? "mapped" : "unmapped") + " readout)");
    }
    out.push_back(record_contrast(r));
  }
  return out;
}

/// Allan curve of one channel on the configured tau grid.
inline AllanCurve channel_allan(const RunConfig& cfg, const ExperimentResult& res, std::size_t channel,
                                double scale_s) {
  const auto series = channel_series(res, channel, cfg.analysis.column);
  if (series.empty()) throw DataError("channel '" + res.channel_names.at(channel) + "' produced no data");
  const double dt = channel_interval(cfg.experiment);
  const auto taus = cfg.analysis.taus.empty() ? default_tau_grid(series.size(), dt, cfg.analysis.per_decade)
                                              : cfg.analysis.taus;
  AllanCurve c = allan_deviation(series, dt, taus);
  if (scale_s > 0) c = rescale_to_rotation(std::move(c), scale_s);
  return c;
}

inline FieldTrajectory make_trajectory(const RunConfig& cfg) {
  return FieldTrajectory(cfg.field, cfg.experiment.duration);
}

struct RunArtifacts {
  nlohmann::json manifest;
  std::vector<std::string> outputs;
  std::optional<std::string> error;
};

namespace detail {

inline nlohmann::json calibration_json(const SlopeCalibration& c) {
  return {{"slope_per_deg_s", c.slope},
          {"scale_factor_s", c.scale_factor_s},
          {"fit_amplitude", c.fit.amplitude},
          {"fit_phase", c.fit.phase},
          {"fit_offset", c.fit.offset},
          {"fit_rms_residual", c.fit.rms_residual}};
}

inline void emit(const std::filesystem::path& dir, const std::string& name, const std::string& text,
                 RunArtifacts& art) {
  write_text_file((dir / name).string(), text);
  art.outputs.push_back(name);
}

inline SequenceConfig with_mapping(SequenceConfig s, bool mapped) {
  s.use_mapping = mapped;
  return s;
}

}  // namespace detail

/// Runs `cfg` and writes every artifact into `out_dir` (created if needed).
/// A failure after some artifacts were written leaves them in place and is
/// reported through `error` and the manifest.
inline RunArtifacts execute_run(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                const std::string& command = "run") {
  std::filesystem::create_directories(out_dir);
  RunArtifacts art;
  auto& m = art.manifest;
  m["version"] = kVersion;
  m["command"] = command;
  m["kind"] = detail::kind_name(cfg.kind);
  m["seed"] = cfg.experiment.seed;
  m["field_seed"] = cfg.field.seed;
  m["config"] = serialize(cfg);
  m["start_time"] = 0.0;
  m["end_time"] = 0.0;
  const auto& ex = cfg.experiment;

  try {
    switch (cfg.kind) {
      case RunKind::experiment: {
        const FieldTrajectory traj = make_trajectory(cfg);
        const ExperimentResult res = run_experiment(ex, traj);
        m["end_time"] = res.end_time;
        m["channels"] = res.channel_names;
        m["decisions"] = decisions_json(res);
        double s = cfg.analysis.scale_s;
        if (!(s > 0)) {
          const auto cal = slope_calibration(ex.sensor, ex.sequence);
          m["calibration"] = detail::calibration_json(cal);
          s = cal.scale_factor_s;
        }
        for (std::size_t c = 0; c < res.records.size(); ++c) {
          std::ostringstream rec;
          write_records_csv(rec, res, c);
          detail::emit(out_dir, "records_" + res.channel_names[c] + ".csv", rec.str(), art);
        }
        if (res.error) throw Error("run aborted: " + *res.error);
        for (std::size_t c = 0; c < res.records.size(); ++c) {
          const AllanCurve curve = channel_allan(cfg, res, c, cfg.analysis.column == "esr_center" ? 0.0 : s);
          std::ostringstream al;
          write_allan_csv(al, curve);
          detail::emit(out_dir, "allan_" + res.channel_names[c] + ".csv", al.str(), art);
          for (const auto& w : curve.warnings) m["warnings"].push_back(res.channel_names[c] + ": " + w);
        }
        break;
      }
      case RunKind::predictor_study: {
        const PredictorStudyResult r = predictor_study(cfg.study);
        std::ostringstream os;
        std::vector<std::string> head{"noise_amplitude"};
        for (int d : r.degrees) head.push_back("d" + std::to_string(d));
        write_csv_row(os, head);
        for (std::size_t a = 0; a < r.noise_amplitudes.size(); ++a) {
          std::vector<std::string> row{format_number(r.noise_amplitudes[a])};
          for (double v : r.mean_error[a]) row.push_back(format_number(v));
          write_csv_row(os, row);
        }
        detail::emit(out_dir, "study_grid.csv", os.str(), art);
        nlohmann::json tests = nlohmann::json::array();
        for (std::size_t a = 0; a < r.noise_amplitudes.size(); ++a) {
          for (std::size_t k = 1; k < r.degrees.size(); ++k) {
            if (cfg.study.realizations < 2) break;
            const PairedTest t = compare_degrees(r, a, k, 0);
            nlohmann::json row;
            row["noise_amplitude"] = r.noise_amplitudes[a];
            row["degree"] = r.degrees[k];
            row["baseline_degree"] = r.degrees[0];
            row["mean_difference"] = t.mean_difference;
            row["t_statistic"] = std::isfinite(t.t_statistic) ? nlohmann::json(t.t_statistic) : nlohmann::json();
            row["p_value"] = t.p_value;
            tests.push_back(row);
          }
        }
        m["paired_tests"] = tests;
        break;
      }
      case RunKind::phase_sweep: {
        std::ostringstream os;
        write_csv_row(os, {"theta[rad]", "F", "G"});
        const auto mapped = phase_sweep(ex.sensor, detail::with_mapping(ex.sequence, true), cfg.sweep_points);
        const auto raw = phase_sweep(ex.sensor, detail::with_mapping(ex.sequence, false), cfg.sweep_points);
        for (std::size_t i = 0; i < mapped.theta.size(); ++i) {
          write_csv_row(os, {format_number(mapped.theta[i]), format_number(mapped.contrast[i]),
                             format_number(raw.contrast[i])});
        }
        detail::emit(out_dir, "phase_sweep.csv", os.str(), art);
        m["calibration"] = {
            {"F", detail::calibration_json(slope_calibration(mapped.theta, mapped.contrast, ex.sequence.t_ramsey))},
            {"G", detail::calibration_json(slope_calibration(raw.theta, raw.contrast, ex.sequence.t_ramsey))}};
        break;
      }
      case RunKind::sensitivity: {
        SensitivityRunConfig sc{ex.sensor, ex.sequence, ex.noise, cfg.sensitivity_blocks, ex.seed};
        const SensitivityRun r = sensitivity_run(sc);
        std::ostringstream os;
        write_csv_row(os, {"block", "contrast"});
        for (std::size_t i = 0; i < r.contrast.size(); ++i) {
          write_csv_row(os, {std::to_string(i), format_number(r.contrast[i])});
        }
        detail::emit(out_dir, "sensitivity_series.csv", os.str(), art);
        m["calibration"] = detail::calibration_json(r.calibration);
        m["sensitivity"] = {{"eta_deg_s_per_sqrt_hz", r.report.eta},
                            {"sigma_f", r.report.sigma_f},
                            {"slope_per_deg_s", r.report.slope},
                            {"t_total", r.report.t_total}};
        m["end_time"] = sc.blocks * ex.sequence.block_period();
        break;
      }
    }
  } catch (const std::exception& e) {
    art.error = e.what();
  }
  m["outputs"] = art.outputs;
  m["error"] = art.error ? nlohmann::json(*art.error) : nlohmann::json(nullptr);
  write_text_file((out_dir / "manifest.json").string(), m.dump(2) + "\n");
  return art;
}

/// Configuration text from a manifest JSON or a plain config file.
inline std::string load_config_text(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("manifest '" + path + "': " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_string()) {
      throw ConfigError("manifest '" + path + "' has no config text");
    }
    return j["config"].get<std::string>();
  }
  return text;
}

}  // namespace nvgyro

#endif
