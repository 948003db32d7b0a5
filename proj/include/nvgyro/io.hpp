#ifndef NVGYRO_IO_HPP
#define NVGYRO_IO_HPP

// CSV and JSON persistence of records, Allan curves and run manifests.
// Numbers are written in shortest round-trip form so that a parse of the
// output recovers every double exactly.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgyro/analysis.hpp"
#include "nvgyro/error.hpp"
#include "nvgyro/protocol.hpp"

namespace nvgyro {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// Parses a full string as a double; accepts nan and +-inf.
inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------- CSV

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_quote(fields[i]);
  }
  os << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of the column whose name, with any "[unit]" suffix removed,
  /// equals `name`. Throws DataError listing the available columns.
  std::size_t column(const std::string& name) const {
    std::string available;
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string base = header[i].substr(0, header[i].find('['));
      if (base == name || header[i] == name) return i;
      available += (i ? ", " : "") + base;
    }
    throw DataError("no column '" + name + "'; available columns: " + available);
  }
};

/// RFC 4180 reader: quoted fields may contain commas, quotes and newlines.
inline CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  const auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (table.header.empty()) {
      table.header = std::move(row);
    } else if (!(row.size() == 1 && row[0].empty())) {
      if (row.size() != table.header.size()) {
        throw DataError("csv line " + std::to_string(line) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size()));
      }
      table.rows.push_back(std::move(row));
    }
    row.clear();
    any = false;
  };
  char ch;
  while (is.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (is.peek() == '"') {
          is.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      end_row();
      ++line;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any) end_row();
  if (table.header.empty()) throw DataError("csv: empty input");
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in);
}

/// Values of a numeric column; empty cells are skipped.
inline std::vector<double> numeric_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& cell = t.rows[r][c];
    if (cell.empty()) continue;
    const auto v = parse_number(cell);
    if (!v) throw DataError("row " + std::to_string(r + 2) + ", column '" + name + "': not a number: " + cell);
    out.push_back(*v);
  }
  return out;
}

// ------------------------------------------------------------ records

inline const std::vector<std::string>& record_header() {
  static const std::vector<std::string> h{
      "block",        "t_start[s]",   "s_plus",       "s_minus",     "esr1",
      "esr2",         "esr3",         "esr4",         "F",           "G",
      "nu1[Hz]",      "nu2[Hz]",      "nu3[Hz]",      "nu4[Hz]",     "mapping[Hz]",
      "nuclear_drive[Hz]", "esr_center[Hz]", "in_band"};
  return h;
}

/// One row per block of one channel. F is filled for mapped readout and G
/// for unmapped readout; esr_center is the four-point estimate (nan when the
/// line was out of band).
inline void write_records_csv(std::ostream& os, const ExperimentResult& res, std::size_t channel) {
  write_csv_row(os, record_header());
  const auto& recs = res.records.at(channel);
  std::vector<const FeedbackDecision*> dec;
  for (const auto& d : res.decisions) {
    if (d.channel == channel) dec.push_back(&d);
  }
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const double contrast = record_contrast(r);
    std::vector<std::string> f{std::to_string(i), format_number(r.t_start), format_number(r.s_plus),
                               format_number(r.s_minus)};
    for (double v : r.esr_samples) f.push_back(format_number(v));
    f.push_back(r.mapped ? format_number(contrast) : "");
    f.push_back(r.mapped ? "" : format_number(contrast));
    for (double v : r.probe_frequencies) f.push_back(format_number(v));
    f.push_back(format_number(r.mapping_frequency));
    f.push_back(format_number(r.nuclear_drive));
    const bool have = i < dec.size();
    f.push_back(have ? format_number(dec[i]->estimated_center) : "nan");
    f.push_back(have && dec[i]->in_band ? "1" : "0");
    write_csv_row(os, f);
  }
}

// --------------------------------------------------------------- Allan

inline void write_allan_csv(std::ostream& os, const AllanCurve& c) {
  write_csv_row(os, {"tau[s]", "sigma", "error", "n", "sigma_rotation[deg/s]"});
  for (const auto& p : c.points) {
    write_csv_row(os, {format_number(p.tau), format_number(p.sigma), format_number(p.error),
                       std::to_string(p.n_subdivisions), format_number(p.sigma_rotation)});
  }
}

inline AllanCurve read_allan_csv(const CsvTable& t) {
  const std::size_t ct = t.column("tau"), cs = t.column("sigma"), ce = t.column("error"),
                    cn = t.column("n"), cr = t.column("sigma_rotation");
  AllanCurve c;
  for (const auto& row : t.rows) {
    AllanPoint p;
    const auto tau = parse_number(row[ct]), sig = parse_number(row[cs]), err = parse_number(row[ce]),
               rot = parse_number(row[cr]);
    const auto n = parse_number(row[cn]);
    if (!tau || !sig || !err || !n || !rot) throw DataError("allan csv: malformed row");
    p.tau = *tau;
    p.sigma = *sig;
    p.error = *err;
    p.n_subdivisions = static_cast<std::size_t>(*n);
    p.sigma_rotation = *rot;
    c.points.push_back(p);
  }
  if (!c.points.empty() && std::isfinite(c.points.front().sigma_rotation) &&
      c.points.front().sigma_rotation > 0) {
    c.scale_factor_s = c.points.front().sigma / c.points.front().sigma_rotation;
  }
  return c;
}

// ------------------------------------------------------------ manifest

inline nlohmann::json decisions_json(const ExperimentResult& res) {
  nlohmann::json arr = nlohmann::json::array();
  const auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  for (const auto& d : res.decisions) {
    arr.push_back({{"channel", res.channel_names.at(d.channel)},
                   {"block", d.block},
                   {"t_start", d.t_start},
                   {"in_band", d.in_band},
                   {"estimated_center", num(d.estimated_center)},
                   {"next_center", d.next_center},
                   {"esr_center", d.esr_center},
                   {"mapping_correction", d.mapping_correction},
                   {"nuclear_correction", d.nuclear_correction}});
  }
  return arr;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace nvgyro

#endif
