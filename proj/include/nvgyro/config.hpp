#ifndef NVGYRO_CONFIG_HPP
#define NVGYRO_CONFIG_HPP

// Text configuration: "[section]" headers followed by "key = value" lines,
// '#' comments, comma-separated lists. Indexed sections "[field.N]" and
// "[channel.N]" describe field components and acquisition channels.
//
// serialize() writes every setting in a fixed order, so
// serialize(parse(serialize(c))) == serialize(c).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "nvgyro/analysis.hpp"
#include "nvgyro/control.hpp"
#include "nvgyro/environment.hpp"
#include "nvgyro/error.hpp"
#include "nvgyro/io.hpp"
#include "nvgyro/protocol.hpp"

namespace nvgyro {

enum class RunKind { experiment, predictor_study, phase_sweep, sensitivity };

struct AnalysisSettings {
  std::string column = "auto";  // F, G, esr_center, or auto (F or G per channel)
  std::vector<double> taus;     // empty: default log grid
  int per_decade = 10;
  double white_lo = 0.0;        // white-noise region of the corrected curve, s
  double white_hi = 0.0;        // zero: up to the last point
  double scale_s = 0.0;         // (deg/s)^-1; zero: from the phase-sweep calibration
};

struct RunConfig {
  RunKind kind = RunKind::experiment;
  ExperimentConfig experiment;
  TrajectorySpec field;
  PredictorStudyConfig study;
  AnalysisSettings analysis;
  int sweep_points = 72;
  int sensitivity_blocks = 200;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string join_numbers(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += format_number(static_cast<double>(v));
  }
  return out;
}

inline const char* kind_name(RunKind k) {
  switch (k) {
    case RunKind::experiment: return "experiment";
    case RunKind::predictor_study: return "predictor_study";
    case RunKind::phase_sweep: return "phase_sweep";
    case RunKind::sensitivity: return "sensitivity";
  }
  return "experiment";
}

// A value together with where it came from, for diagnostics.
struct Entry {
  std::string value;
  int line = 0;
  std::string origin;  // "--set key=value" for overrides

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    if (line > 0) throw ConfigError(key + ": " + what, line);
    throw ConfigError(origin + ": " + key + ": " + what);
  }

  double number(const std::string& key) const {
    const auto v = parse_number(value);
    if (!v) fail(key, "expected a number, got '" + value + "'");
    return *v;
  }

  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0)) fail(key, "must be positive");
    return v;
  }

  double non_negative(const std::string& key) const {
    const double v = number(key);
    if (!(v >= 0)) fail(key, "must be non-negative");
    return v;
  }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(key, "expected an integer, got '" + value + "'");
    return static_cast<long long>(v);
  }

  std::uint64_t seed(const std::string& key) const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      fail(key, "expected a non-negative integer, got '" + value + "'");
    }
    return v;
  }

  bool boolean(const std::string& key) const {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    fail(key, "expected true or false, got '" + value + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto v = parse_number(item);
      if (!v) fail(key, "expected a comma-separated list of numbers, got '" + value + "'");
      out.push_back(*v);
    }
    return out;
  }
};

// section -> key -> entry, in file order of first appearance.
struct Document {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, Entry>>>> sections;

  std::vector<std::pair<std::string, Entry>>& section(const std::string& name) {
    for (auto& s : sections) {
      if (s.first == name) return s.second;
    }
    sections.push_back({name, {}});
    return sections.back().second;
  }

  void set(const std::string& sec, const std::string& key, Entry e, bool allow_replace) {
    auto& s = section(sec);
    for (auto& kv : s) {
      if (kv.first == key) {
        if (!allow_replace) e.fail(key, "duplicate key in [" + sec + "]");
        kv.second = std::move(e);
        return;
      }
    }
    s.push_back({key, std::move(e)});
  }
};

inline Document parse_document(std::string_view text) {
  Document doc;
  std::string current;
  bool have_section = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError("empty section name", line_no);
      doc.section(current);
      have_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (!have_section) throw ConfigError("setting before the first [section]", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("missing key", line_no);
    doc.set(current, key, Entry{trim(std::string_view(line).substr(eq + 1)), line_no, ""}, false);
  }
  return doc;
}

// "a.b.c=v" -> section "a.b", key "c".
inline void apply_override(Document& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string path = trim(std::string_view(assignment).substr(0, eq));
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("--set " + assignment + ": expected a dotted path section.key");
  }
  doc.set(path.substr(0, dot), path.substr(dot + 1),
          Entry{trim(std::string_view(assignment).substr(eq + 1)), 0, "--set " + assignment}, true);
}

using Setter = std::function<void(RunConfig&, const Entry&, const std::string&)>;

inline const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
#define NVG_NUM(sec, key, expr) \
  t[sec][#key] = [](RunConfig& c, const Entry& e, const std::string& k) { expr = e.number(k); }
#define NVG_POS(sec, key, expr) \
  t[sec][#key] = [](RunConfig& c, const Entry& e, const std::string& k) { expr = e.positive(k); }
#define NVG_NNEG(sec, key, expr) \
  t[sec][#key] = [](RunConfig& c, const Entry& e, const std::string& k) { expr = e.non_negative(k); }
#define NVG_BOOL(sec, key, expr) \
  t[sec][#key] = [](RunConfig& c, const Entry& e, const std::string& k) { expr = e.boolean(k); }
#define NVG_INT(sec, key, expr, lo)                                            \
  t[sec][#key] = [](RunConfig& c, const Entry& e, const std::string& k) {      \
    const long long v = e.integer(k);                                          \
    if (v < (lo)) e.fail(k, "must be at least " + std::to_string(lo));         \
    expr = static_cast<std::remove_reference_t<decltype(expr)>>(v);            \
  }

    t["run"]["kind"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      for (RunKind r : {RunKind::experiment, RunKind::predictor_study, RunKind::phase_sweep,
                        RunKind::sensitivity}) {
        if (e.value == kind_name(r)) {
          c.kind = r;
          return;
        }
      }
      e.fail(k, "expected experiment, predictor_study, phase_sweep or sensitivity");
    };
    NVG_POS("run", duration, c.experiment.duration);
    t["run"]["seed"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.experiment.seed = e.seed(k); };
    NVG_INT("run", predictor_degree, c.experiment.predictor_degree, 0);
    NVG_INT("run", predictor_points, c.experiment.predictor_points, 0);
    NVG_INT("run", history_capacity, c.experiment.history_capacity, 1);
    NVG_NNEG("run", capture_range, c.experiment.capture_range);
    NVG_NNEG("run", parallel_tolerance, c.experiment.parallel_tolerance);
    NVG_BOOL("run", interleave, c.experiment.interleave);

    NVG_POS("sensor", gamma_e, c.experiment.sensor.gamma_e);
    NVG_POS("sensor", gamma_n, c.experiment.sensor.gamma_n);
    NVG_POS("sensor", b0, c.experiment.sensor.b0);
    NVG_POS("sensor", nu_e, c.experiment.sensor.nu_e);
    NVG_POS("sensor", nu_n, c.experiment.sensor.nu_n);
    NVG_POS("sensor", t2e_star, c.experiment.sensor.t2e_star);
    NVG_POS("sensor", t2n_star, c.experiment.sensor.t2n_star);
    NVG_POS("sensor", esr_contrast, c.experiment.sensor.esr_contrast);
    NVG_POS("sensor", esr_linewidth, c.experiment.sensor.esr_linewidth);
    NVG_POS("sensor", hyperfine_splitting, c.experiment.sensor.hyperfine_splitting);
    NVG_NUM("sensor", nuclear_polarization, c.experiment.sensor.nuclear_polarization);
    NVG_POS("sensor", mapping_rabi, c.experiment.sensor.mapping_rabi);
    NVG_POS("sensor", mapping_contrast_gain, c.experiment.sensor.mapping_contrast_gain);
    NVG_POS("sensor", mapped_contrast, c.experiment.sensor.mapped_contrast);
    NVG_POS("sensor", electronic_contrast, c.experiment.sensor.electronic_contrast);

    NVG_POS("sequence", t_ramsey, c.experiment.sequence.t_ramsey);
    NVG_NUM("sequence", theta_plus, c.experiment.sequence.theta_plus);
    NVG_NUM("sequence", theta_minus, c.experiment.sequence.theta_minus);
    t["sequence"]["esr_offsets"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      const auto v = e.numbers(k);
      if (v.size() != 4) e.fail(k, "expected exactly four offsets");
      std::copy(v.begin(), v.end(), c.experiment.sequence.esr_offsets.begin());
    };
    NVG_INT("sequence", n_r, c.experiment.sequence.n_r, 1);
    NVG_POS("sequence", block_dead_time, c.experiment.sequence.block_dead_time);
    NVG_POS("sequence", sequence_length, c.experiment.sequence.sequence_length);
    NVG_BOOL("sequence", use_mapping, c.experiment.sequence.use_mapping);
    NVG_NUM("sequence", emulated_rotation, c.experiment.sequence.emulated_rotation);
    NVG_NUM("sequence", ramsey_detuning, c.experiment.sequence.ramsey_detuning);
    t["sequence"]["sensing_spin"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      if (e.value == "nuclear") {
        c.experiment.sequence.sensing_spin = Spin::nuclear;
      } else if (e.value == "electronic") {
        c.experiment.sequence.sensing_spin = Spin::electronic;
      } else {
        e.fail(k, "expected nuclear or electronic");
      }
    };

    NVG_NNEG("noise", readout_sigma, c.experiment.noise.readout_sigma);
    NVG_BOOL("noise", shot_noise, c.experiment.noise.shot_noise_enabled);
    NVG_POS("noise", photon_budget, c.experiment.noise.photon_budget);

    t["field"]["seed"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.field.seed = e.seed(k); };
    NVG_POS("field", grid_step, c.field.grid_step);

    NVG_NUM("study", amplitude, c.study.perturbation_amplitude);
    t["study"]["noise_amplitudes"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.study.noise_amplitudes = e.numbers(k);
      for (double v : c.study.noise_amplitudes) {
        if (!(v >= 0)) e.fail(k, "noise amplitudes must be non-negative");
      }
    };
    t["study"]["degrees"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.study.degrees.clear();
      for (double v : e.numbers(k)) {
        if (v != std::floor(v) || v < 0) e.fail(k, "degrees must be non-negative integers");
        c.study.degrees.push_back(static_cast<int>(v));
      }
    };
    NVG_INT("study", realizations, c.study.realizations, 1);
    NVG_POS("study", samples_per_period, c.study.samples_per_period);
    NVG_INT("study", trace_length, c.study.trace_length, 2);
    NVG_INT("study", extra_points, c.study.extra_points, 0);
    t["study"]["seed"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.study.seed = e.seed(k); };

    t["analysis"]["column"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      if (e.value != "auto" && e.value != "F" && e.value != "G" && e.value != "esr_center") {
        e.fail(k, "expected auto, F, G or esr_center");
      }
      c.analysis.column = e.value;
    };
    t["analysis"]["taus"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.analysis.taus = e.numbers(k);
      for (double v : c.analysis.taus) {
        if (!(v > 0)) e.fail(k, "taus must be positive");
      }
    };
    NVG_INT("analysis", per_decade, c.analysis.per_decade, 1);
    NVG_NNEG("analysis", white_lo, c.analysis.white_lo);
    NVG_NNEG("analysis", white_hi, c.analysis.white_hi);
    NVG_NNEG("analysis", scale_s, c.analysis.scale_s);

    NVG_INT("calibration", sweep_points, c.sweep_points, 4);
    NVG_INT("calibration", blocks, c.sensitivity_blocks, 2);
#undef NVG_NUM
#undef NVG_POS
#undef NVG_NNEG
#undef NVG_BOOL
#undef NVG_INT
    return t;
  }();
  return table;
}

inline std::optional<std::size_t> indexed_section(const std::string& name, std::string_view prefix) {
  if (name.size() <= prefix.size() + 1 || name.compare(0, prefix.size(), prefix) != 0 ||
      name[prefix.size()] != '.') {
    return std::nullopt;
  }
  std::size_t v = 0;
  const char* b = name.data() + prefix.size() + 1;
  const char* e = name.data() + name.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) return std::nullopt;
  return v;
}

using Keyed = std::vector<std::pair<std::string, Entry>>;

inline const Entry* find_key(const Keyed& kv, const std::string& key) {
  for (const auto& p : kv) {
    if (p.first == key) return &p.second;
  }
  return nullptr;
}

inline int first_line(const Keyed& kv) {
  for (const auto& p : kv) {
    if (p.second.line > 0) return p.second.line;
  }
  return 0;
}

inline FieldComponent build_component(const std::string& sec, const Keyed& kv) {
  const Entry* type = find_key(kv, "type");
  if (!type) throw ConfigError("[" + sec + "] needs a 'type' key", first_line(kv));
  const auto allowed = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, e] : kv) {
      if (k == "type") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        e.fail(k, "unknown key for a " + type->value + " component");
      }
    }
  };
  const auto get = [&](const char* key, double fallback, auto conv) {
    const Entry* e = find_key(kv, key);
    return e ? (e->*conv)(key) : fallback;
  };
  if (type->value == "sinusoid") {
    allowed({"amplitude_pp", "period", "phase"});
    return Sinusoid{get("amplitude_pp", 0.0, &Entry::number), get("period", 1.0, &Entry::positive),
                    get("phase", 0.0, &Entry::number)};
  }
  if (type->value == "random_walk") {
    allowed({"diffusion"});
    return RandomWalk{get("diffusion", 0.0, &Entry::non_negative)};
  }
  if (type->value == "ornstein_uhlenbeck") {
    allowed({"sigma", "correlation_time"});
    return OrnsteinUhlenbeck{get("sigma", 0.0, &Entry::non_negative),
                             get("correlation_time", 1e4, &Entry::positive)};
  }
  if (type->value == "constant") {
    allowed({"offset"});
    return ConstantField{get("offset", 0.0, &Entry::number)};
  }
  type->fail("type", "expected sinusoid, random_walk, ornstein_uhlenbeck or constant");
}

inline ChannelSpec build_channel(std::size_t index, const Keyed& kv) {
  ChannelSpec ch{"channel" + std::to_string(index), {}};
  for (const auto& [k, e] : kv) {
    if (k == "name") {
      if (e.value.empty() || e.value.find_first_of("/\\ ,") != std::string::npos) {
        e.fail(k, "channel names must be non-empty without spaces, commas or slashes");
      }
      ch.name = e.value;
    } else if (k == "track_probes") {
      ch.controller.track_probes = e.boolean(k);
    } else if (k == "correct_mapping") {
      ch.controller.correct_mapping = e.boolean(k);
    } else if (k == "nuclear_gain") {
      ch.controller.nuclear_gain = e.number(k);
    } else {
      e.fail(k, "unknown key in [channel." + std::to_string(index) + "]");
    }
  }
  return ch;
}

inline RunConfig build(const Document& doc) {
  RunConfig cfg;
  std::map<std::size_t, std::pair<std::string, Keyed>> fields, channels;
  for (const auto& [sec, kv] : doc.sections) {
    if (auto i = indexed_section(sec, "field")) {
      fields[*i] = {sec, kv};
      continue;
    }
    if (auto i = indexed_section(sec, "channel")) {
      channels[*i] = {sec, kv};
      continue;
    }
    const auto table = setters().find(sec);
    if (table == setters().end()) {
      const int line = first_line(kv);
      const std::string msg = "unknown section [" + sec + "]";
      if (line > 0 || kv.empty()) throw ConfigError(msg, line);
      kv.front().second.fail(kv.front().first, msg);
    }
    for (const auto& [key, entry] : kv) {
      const auto it = table->second.find(key);
      if (it == table->second.end()) entry.fail(key, "unknown key in [" + sec + "]");
      it->second(cfg, entry, key);
    }
  }
  for (const auto& [i, sk] : fields) cfg.field.components.push_back(build_component(sk.first, sk.second));
  if (!channels.empty()) {
    cfg.experiment.channels.clear();
    for (const auto& [i, sk] : channels) cfg.experiment.channels.push_back(build_channel(i, sk.second));
  }
  try {
    cfg.experiment.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

}  // namespace detail

/// Parses configuration text, then applies "section.key=value" overrides.
/// Throws ConfigError carrying the offending line.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
  detail::Document doc = detail::parse_document(text);
  for (const auto& o : overrides) detail::apply_override(doc, o);
  return detail::build(doc);
}

/// Canonical text form listing every setting.
inline std::string serialize(const RunConfig& c) {
  using detail::join_numbers;
  const auto n = [](double v) { return format_number(v); };
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  const auto& e = c.experiment;
  const auto& s = e.sensor;
  const auto& q = e.sequence;
  std::ostringstream o;
  o << "[run]\n"
    << "kind = " << detail::kind_name(c.kind) << "\n"
    << "duration = " << n(e.duration) << "\n"
    << "seed = " << e.seed << "\n"
    << "interleave = " << b(e.interleave) << "\n"
    << "predictor_degree = " << e.predictor_degree << "\n"
    << "predictor_points = " << e.predictor_points << "\n"
    << "history_capacity = " << e.history_capacity << "\n"
    << "capture_range = " << n(e.capture_range) << "\n"
    << "parallel_tolerance = " << n(e.parallel_tolerance) << "\n\n";
  o << "[sensor]\n"
    << "gamma_e = " << n(s.gamma_e) << "\n"
    << "gamma_n = " << n(s.gamma_n) << "\n"
    << "b0 = " << n(s.b0) << "\n"
    << "nu_e = " << n(s.nu_e) << "\n"
    << "nu_n = " << n(s.nu_n) << "\n"
    << "t2e_star = " << n(s.t2e_star) << "\n"
    << "t2n_star = " << n(s.t2n_star) << "\n"
    << "esr_contrast = " << n(s.esr_contrast) << "\n"
    << "esr_linewidth = " << n(s.esr_linewidth) << "\n"
    << "hyperfine_splitting = " << n(s.hyperfine_splitting) << "\n"
    << "nuclear_polarization = " << n(s.nuclear_polarization) << "\n"
    << "mapping_rabi = " << n(s.mapping_rabi) << "\n"
    << "mapping_contrast_gain = " << n(s.mapping_contrast_gain) << "\n"
    << "mapped_contrast = " << n(s.mapped_contrast) << "\n"
    << "electronic_contrast = " << n(s.electronic_contrast) << "\n\n";
  o << "[sequence]\n"
    << "t_ramsey = " << n(q.t_ramsey) << "\n"
    << "theta_plus = " << n(q.theta_plus) << "\n"
    << "theta_minus = " << n(q.theta_minus) << "\n"
    << "esr_offsets = " << join_numbers(q.esr_offsets) << "\n"
    << "n_r = " << q.n_r << "\n"
    << "block_dead_time = " << n(q.block_dead_time) << "\n"
    << "sequence_length = " << n(q.sequence_length) << "\n"
    << "use_mapping = " << b(q.use_mapping) << "\n"
    << "emulated_rotation = " << n(q.emulated_rotation) << "\n"
    << "ramsey_detuning = " << n(q.ramsey_detuning) << "\n"
    << "sensing_spin = " << (q.sensing_spin == Spin::nuclear ? "nuclear" : "electronic") << "\n\n";
  o << "[noise]\n"
    << "readout_sigma = " << n(e.noise.readout_sigma) << "\n"
    << "shot_noise = " << b(e.noise.shot_noise_enabled) << "\n"
    << "photon_budget = " << n(e.noise.photon_budget) << "\n\n";
  o << "[field]\n"
    << "seed = " << c.field.seed << "\n"
    << "grid_step = " << n(c.field.grid_step) << "\n\n";
  for (std::size_t i = 0; i < c.field.components.size(); ++i) {
    o << "[field." << i << "]\n";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Sinusoid>) {
            o << "type = sinusoid\namplitude_pp = " << n(v.amplitude_pp) << "\nperiod = " << n(v.period)
              << "\nphase = " << n(v.phase) << "\n";
          } else if constexpr (std::is_same_v<T, RandomWalk>) {
            o << "type = random_walk\ndiffusion = " << n(v.diffusion) << "\n";
          } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
            o << "type = ornstein_uhlenbeck\nsigma = " << n(v.sigma)
              << "\ncorrelation_time = " << n(v.correlation_time) << "\n";
          } else {
            o << "type = constant\noffset = " << n(v.offset) << "\n";
          }
        },
        c.field.components[i]);
    o << "\n";
  }
  for (std::size_t i = 0; i < e.channels.size(); ++i) {
    const auto& ch = e.channels[i];
    o << "[channel." << i << "]\n"
      << "name = " << ch.name << "\n"
      << "track_probes = " << b(ch.controller.track_probes) << "\n"
      << "correct_mapping = " << b(ch.controller.correct_mapping) << "\n"
      << "nuclear_gain = " << n(ch.controller.nuclear_gain) << "\n\n";
  }
  o << "[study]\n"
    << "amplitude = " << n(c.study.perturbation_amplitude) << "\n"
    << "noise_amplitudes = " << join_numbers(c.study.noise_amplitudes) << "\n"
    << "degrees = " << join_numbers(c.study.degrees) << "\n"
    << "realizations = " << c.study.realizations << "\n"
    << "samples_per_period = " << n(c.study.samples_per_period) << "\n"
    << "trace_length = " << c.study.trace_length << "\n"
    << "extra_points = " << c.study.extra_points << "\n"
    << "seed = " << c.study.seed << "\n\n";
  o << "[analysis]\n"
    << "column = " << c.analysis.column << "\n"
    << "taus = " << join_numbers(c.analysis.taus) << "\n"
    << "per_decade = " << c.analysis.per_decade << "\n"
    << "white_lo = " << n(c.analysis.white_lo) << "\n"
    << "white_hi = " << n(c.analysis.white_hi) << "\n"
    << "scale_s = " << n(c.analysis.scale_s) << "\n\n";
  o << "[calibration]\n"
    << "sweep_points = " << c.sweep_points << "\n"
    << "blocks = " << c.sensitivity_blocks << "\n";
  return o.str();
}

}  // namespace nvgyro

#endif
