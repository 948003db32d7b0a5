// nvgyro command-line front end.
//
// Exit status: 0 success, 2 configuration or usage error, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nvgyro/nvgyro.hpp"

#ifndef NVGYRO_PRESET_DIR
#define NVGYRO_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace nvgyro;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigSource {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "configuration file or run manifest (JSON)");
    app->add_option("--preset", preset, "checked-in recipe: fig1e, fig2, fig3, fig4, sensitivity, electronic");
    app->add_option("--set", overrides, "dotted override section.key=value (repeatable)");
    app->add_option("--seed", seed, "seed for readout noise and field trajectory");
  }

  std::string name() const {
    if (!preset.empty()) return preset;
    if (!config_path.empty()) return fs::path(config_path).stem().string();
    return "default";
  }

  RunConfig load() const {
    if (!config_path.empty() && !preset.empty()) throw ConfigError("--config and --preset are exclusive");
    std::string text;
    if (!preset.empty()) {
      const char* env = std::getenv("NVGYRO_PRESETS");
      const fs::path dir = env && *env ? fs::path(env) : fs::path(NVGYRO_PRESET_DIR);
      const fs::path file = dir / (preset + ".conf");
      if (!fs::exists(file)) throw ConfigError("unknown preset '" + preset + "' (no " + file.string() + ")");
      text = read_text_file(file.string());
    } else if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw ConfigError("config file '" + config_path + "' not found");
      text = load_config_text(config_path);
    }
    std::vector<std::string> all = overrides;
    if (seed) {
      all.push_back("run.seed=" + std::to_string(*seed));
      all.push_back("field.seed=" + std::to_string(*seed));
    }
    return parse_config(text, all);
  }
};

fs::path default_out(const std::string& name) {
  const char* root = std::getenv("NVGYRO_OUT");
  return (root && *root ? fs::path(root) : fs::path("nvgyro-out")) / name;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_number(item);
    if (!v || !(*v > 0)) throw ConfigError(std::string(what) + ": expected positive numbers, got '" + s + "'");
    out.push_back(*v);
  }
  return out;
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_text_file(out, text);
  }
}

// ------------------------------------------------------------------ run

int cmd_run(const ConfigSource& src, const std::string& out) {
  const RunConfig cfg = src.load();
  const fs::path dir = out.empty() ? default_out(src.name()) : fs::path(out);
  const RunArtifacts art = execute_run(cfg, dir);
  for (const auto& f : art.outputs) std::cout << (dir / f).string() << "\n";
  std::cout << (dir / "manifest.json").string() << "\n";
  if (art.error) {
    std::cerr << "nvgyro: run failed: " << *art.error << "\n";
    return kExitRuntime;
  }
  return 0;
}

// ---------------------------------------------------------------- allan

int cmd_allan(const std::string& input, const std::string& column, const std::string& taus_arg,
              double scale_s, const std::string& out) {
  const CsvTable t = read_csv_file(input);
  const auto values = numeric_column(t, column);
  if (values.empty()) throw DataError("column '" + column + "' has no values in '" + input + "'");
  const auto times = numeric_column(t, "t_start");
  if (times.size() < 2) throw DataError("need at least two rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  const auto taus = taus_arg.empty() ? default_tau_grid(values.size(), dt) : parse_list(taus_arg, "--taus");
  AllanCurve c = allan_deviation(values, dt, taus);
  if (scale_s > 0) c = rescale_to_rotation(std::move(c), scale_s);
  for (const auto& w : c.warnings) std::cerr << "nvgyro: warning: " << w << "\n";
  std::ostringstream os;
  write_allan_csv(os, c);
  write_or_print(out, os.str());
  return 0;
}

// --------------------------------------------------------------- report

struct LabeledCurve {
  std::string label;
  AllanCurve curve;
};

std::vector<LabeledCurve> load_curves(const std::string& arg) {
  std::vector<LabeledCurve> out;
  const fs::path p(arg);
  if (fs::is_directory(p)) {
    std::vector<std::string> names;
    const fs::path manifest = p / "manifest.json";
    if (fs::exists(manifest)) {
      const auto j = nlohmann::json::parse(read_text_file(manifest.string()));
      if (j.contains("channels")) names = j["channels"].get<std::vector<std::string>>();
    }
    if (names.empty()) {
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string f = e.path().filename().string();
        if (f.rfind("allan_", 0) == 0 && e.path().extension() == ".csv") names.push_back(f.substr(6, f.size() - 10));
      }
      std::sort(names.begin(), names.end());
    }
    if (names.empty()) throw DataError("no Allan curves in '" + arg + "'");
    for (const auto& n : names) {
      out.push_back({p.filename().string() + "/" + n, read_allan_csv(read_csv_file((p / ("allan_" + n + ".csv")).string()))});
    }
  } else {
    out.push_back({p.stem().string(), read_allan_csv(read_csv_file(arg))});
  }
  return out;
}

nlohmann::json curve_json(const LabeledCurve& c) {
  nlohmann::json j;
  j["label"] = c.label;
  for (const auto& p : c.curve.points) {
    j["tau"].push_back(p.tau);
    j["sigma"].push_back(p.sigma);
    j["error"].push_back(p.error);
    j["n"].push_back(p.n_subdivisions);
  }
  return j;
}

int cmd_report(const std::vector<std::string>& inputs, double white_lo, double white_hi, double period,
               std::optional<std::size_t> reference, const std::string& out) {
  std::vector<LabeledCurve> curves;
  for (const auto& in : inputs) {
    for (auto& c : load_curves(in)) curves.push_back(std::move(c));
  }
  if (curves.empty()) throw DataError("report needs at least one curve");
  if (curves.size() == 1) curves.push_back(curves.front());

  nlohmann::json j;
  for (const auto& c : curves) j["curves"].push_back(curve_json(c));
  const WhiteRegion white{white_lo, white_hi > 0 ? white_hi : std::numeric_limits<double>::infinity()};
  std::ostringstream table;
  for (std::size_t k = 1; k < curves.size(); ++k) {
    const StabilityReport r = stability_report(curves[0].curve, curves[k].curve, white);
    nlohmann::json cj;
    cj["reference"] = curves[0].label;
    cj["label"] = curves[k].label;
    cj["tau"] = r.taus;
    cj["improvement"] = r.improvement;
    cj["optimum_tau"] = r.optimum_tau;
    cj["optimum_sigma"] = r.optimum_sigma;
    cj["white_slope"] = r.white_slope;
    cj["deviates_from_sqrt_law"] = r.deviates_from_sqrt_law;
    j["comparisons"].push_back(cj);
    table << curves[0].label << " vs " << curves[k].label << "\n";
    table << "  tau[s]        improvement\n";
    for (std::size_t i = 0; i < r.taus.size(); ++i) {
      table << "  " << format_number(r.taus[i]) << "  " << format_number(r.improvement[i]) << "\n";
    }
    table << "  optimum tau " << format_number(r.optimum_tau) << " s, sigma " << format_number(r.optimum_sigma)
          << ", white slope " << format_number(r.white_slope)
          << (r.deviates_from_sqrt_law ? " (deviates from -1/2)" : "") << "\n";
  }
  if (period > 0) {
    std::vector<AllanCurve> cs;
    for (const auto& c : curves) cs.push_back(c.curve);
    const std::size_t ref = reference.value_or(cs.size() / 2);
    const OrderingCheck o = ordering_at_period(cs, ref, period);
    j["ordering"] = {{"period", period}, {"tau", o.tau}, {"sigma", o.sigma}, {"ascending", o.ascending},
                     {"reference", curves.at(ref).label}};
    table << "ordering at tau " << format_number(o.tau) << " s:";
    for (std::size_t i = 0; i < cs.size(); ++i) table << " " << curves[i].label << "=" << format_number(o.sigma[i]);
    table << (o.ascending ? "  ascending\n" : "  not ascending\n");
  }
  std::cout << table.str();
  if (!out.empty()) write_or_print(out, j.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------- estimate

int cmd_estimate(const ConfigSource& src, const std::string& input, const std::string& out) {
  const RunConfig cfg = src.load();
  const CsvTable t = read_csv_file(input);
  std::array<std::size_t, 4> fc{}, sc{};
  for (std::size_t k = 0; k < 4; ++k) {
    fc[k] = t.column("nu" + std::to_string(k + 1));
    sc[k] = t.column("esr" + std::to_string(k + 1));
  }
  FourPointOptions opt;
  opt.nominal_slope = nominal_secant_slope(cfg.experiment.sensor, cfg.experiment.sequence.esr_offsets);
  opt.parallel_tolerance = cfg.experiment.parallel_tolerance;
  opt.capture_range = cfg.experiment.capture_range;
  std::ostringstream os;
  write_csv_row(os, {"row", "estimated_center[Hz]", "status"});
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    FourPointReading reading;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto f = parse_number(t.rows[r][fc[k]]);
      const auto s = parse_number(t.rows[r][sc[k]]);
      if (!f || !s) throw DataError("row " + std::to_string(r + 2) + ": malformed reading");
      reading.frequencies[k] = *f;
      reading.signals[k] = *s;
    }
    try {
      // Adding +0 folds a signed zero into 0.
      write_csv_row(os, {std::to_string(r), format_number(four_point_estimate(reading, opt) + 0.0), "ok"});
    } catch (const OutOfBandError& e) {
      write_csv_row(os, {std::to_string(r), "nan", std::string("out_of_band: ") + e.what()});
    }
  }
  write_or_print(out, os.str());
  return 0;
}

// ------------------------------------------------------------ calibrate

int cmd_calibrate(const ConfigSource& src, const std::string& out) {
  RunConfig cfg = src.load();
  cfg.kind = RunKind::phase_sweep;
  const fs::path dir = out.empty() ? default_out(src.name() + "-calibration") : fs::path(out);
  const RunArtifacts art = execute_run(cfg, dir, "calibrate");
  if (art.error) {
    std::cerr << "nvgyro: calibration failed: " << *art.error << "\n";
    return kExitRuntime;
  }
  const auto& cal = art.manifest["calibration"];
  for (const char* k : {"F", "G"}) {
    std::cout << k << ": slope " << format_number(cal[k]["slope_per_deg_s"].get<double>())
              << " per deg/s, s = " << format_number(cal[k]["scale_factor_s"].get<double>()) << " (deg/s)^-1\n";
  }
  std::cout << (dir / "manifest.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- field

int cmd_field(const ConfigSource& src, double step, double duration, const std::string& out) {
  const RunConfig cfg = src.load();
  if (!(step > 0)) throw ConfigError("--step must be positive");
  const double horizon = duration > 0 ? duration : cfg.experiment.duration;
  const FieldTrajectory traj(cfg.field, horizon);
  std::ostringstream os;
  std::vector<std::string> head{"t[s]", "b[G]"};
  for (std::size_t i = 0; i < cfg.field.components.size(); ++i) head.push_back("component" + std::to_string(i) + "[G]");
  write_csv_row(os, head);
  const auto n = static_cast<std::size_t>(std::floor(horizon / step));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    std::vector<std::string> row{format_number(t), format_number(traj.field_at(t))};
    for (std::size_t i = 0; i < cfg.field.components.size(); ++i) row.push_back(format_number(traj.component_at(i, t)));
    write_csv_row(os, row);
  }
  write_or_print(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-spin NV gyroscope simulator and stability analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("nvgyro ") + kVersion);

  ConfigSource run_src, est_src, cal_src, field_src;
  std::string run_out, allan_out, report_out, est_out, cal_out, field_out;

  auto* run = app.add_subcommand("run", "run a configured experiment, study or sweep");
  run_src.attach(run);
  run->add_option("--out", run_out, "output directory (default $NVGYRO_OUT/<name>)");

  std::string allan_in, allan_column = "F", allan_taus;
  double allan_scale = 0.0;
  auto* allan = app.add_subcommand("allan", "Allan deviation of a records CSV column");
  allan->add_option("records", allan_in, "records CSV")->required();
  allan->add_option("--column", allan_column, "F, G or esr_center");
  allan->add_option("--taus", allan_taus, "comma-separated averaging times in s");
  allan->add_option("--scale-s", allan_scale, "scale factor s for the rotation axis, (deg/s)^-1");
  allan->add_option("--out", allan_out, "output CSV (default stdout)");

  std::vector<std::string> report_in;
  double white_lo = 0.0, white_hi = 0.0, period = 0.0;
  std::optional<std::size_t> reference;
  auto* report = app.add_subcommand("report", "compare Allan curves of run directories or CSVs");
  report->add_option("inputs", report_in, "run directories or Allan CSVs; the first curve is the reference")->required();
  report->add_option("--white-lo", white_lo, "lower end of the white-noise region, s");
  report->add_option("--white-hi", white_hi, "upper end of the white-noise region, s");
  report->add_option("--period", period, "check ascending order of the curves near this perturbation period, s");
  report->add_option("--reference", reference, "curve index whose peak selects the ordering tau (default middle)");
  report->add_option("--out", report_out, "plot-ready JSON output");

  std::string est_in;
  auto* estimate = app.add_subcommand("estimate", "four-point line-center estimates from a CSV");
  est_src.attach(estimate);
  estimate->add_option("readings", est_in, "CSV with nu1..nu4 and esr1..esr4 columns")->required();
  estimate->add_option("--out", est_out, "output CSV (default stdout)");

  auto* calibrate = app.add_subcommand("calibrate", "phase-sweep slope and scale-factor calibration");
  cal_src.attach(calibrate);
  calibrate->add_option("--out", cal_out, "output directory");

  double step = 1.0, duration = 0.0;
  auto* field = app.add_subcommand("field", "dump the field trajectory b(t) to CSV");
  field_src.attach(field);
  field->add_option("--step", step, "sampling step, s");
  field->add_option("--duration", duration, "end time, s (default run.duration)");
  field->add_option("--out", field_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_src, run_out);
    if (*allan) return cmd_allan(allan_in, allan_column, allan_taus, allan_scale, allan_out);
    if (*report) return cmd_report(report_in, white_lo, white_hi, period, reference, report_out);
    if (*estimate) return cmd_estimate(est_src, est_in, est_out);
    if (*calibrate) return cmd_calibrate(cal_src, cal_out);
    if (*field) return cmd_field(field_src, step, duration, field_out);
  } catch (const ConfigError& e) {
    std::cerr << "nvgyro: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "nvgyro: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
