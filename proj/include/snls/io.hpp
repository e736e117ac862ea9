#ifndef SNLS_IO_HPP
#define SNLS_IO_HPP

#include "snls/evolution.hpp"
#include "snls/functionals.hpp"
#include "snls/groundstate.hpp"
#include "snls/grid.hpp"
#include "snls/weights.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace snls {

static_assert(std::endian::native == std::endian::little, "CRF1 I/O assumes a little-endian host");

/// Malformed or unreadable persisted data.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw FormatError("truncated CRF1 record");
  return value;
}

} // namespace detail

/**
 * CRF1 record: 64-byte header
 *   0-3 "CRF1", 4 mode byte, 5-7 zero, 8-31 three u64 axis counts,
 *   32-55 three f64 extents, 56-63 zero,
 * followed by interleaved (re, im) f64 samples in row-major axis order.
 */
inline void write_crf1(std::ostream& os, const ComplexField& f) {
  const GridSpec& g = f.grid();
  os.write("CRF1", 4);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(g.mode()));
  for (int i = 0; i < 3; ++i) detail::put<std::uint8_t>(os, 0);
  for (std::size_t a = 0; a < 3; ++a) detail::put<std::uint64_t>(os, g.points(a));
  for (std::size_t a = 0; a < 3; ++a) detail::put<double>(os, g.extent(a));
  detail::put<std::uint64_t>(os, 0);
  for (const auto& z : f.samples()) {
    detail::put<double>(os, z.real());
    detail::put<double>(os, z.imag());
  }
  if (!os) throw FormatError("failed to write CRF1 record");
}

inline ComplexField read_crf1(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "CRF1", 4) != 0) throw FormatError("missing CRF1 magic");
  const auto mode = detail::get<std::uint8_t>(is);
  if (mode > 2) throw FormatError("unknown CRF1 mode byte");
  for (int i = 0; i < 3; ++i) detail::get<std::uint8_t>(is);
  std::array<std::size_t, 3> n{};
  std::array<double, 3> e{};
  for (auto& x : n) x = static_cast<std::size_t>(detail::get<std::uint64_t>(is));
  for (auto& x : e) x = detail::get<double>(is);
  detail::get<std::uint64_t>(is);
  GridSpec g = GridSpec::from_raw(static_cast<GridMode>(mode), n, e);
  std::vector<complex> samples(g.size());
  for (auto& z : samples) {
    const double re = detail::get<double>(is);
    const double im = detail::get<double>(is);
    z = {re, im};
  }
  ComplexField f(g, std::move(samples));
  if (!f.all_finite()) throw FormatError("CRF1 record contains non-finite samples");
  return f;
}

/// A state snapshot is the u record followed by the v record.
inline void write_state(const std::filesystem::path& path, const StatePair& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_crf1(os, s.u);
  write_crf1(os, s.v);
}

inline StatePair read_state(const std::filesystem::path& path, double gamma, double mu) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  ComplexField u = read_crf1(is);
  ComplexField v = read_crf1(is);
  return StatePair(std::move(u), std::move(v), gamma, mu);
}

inline const std::vector<std::string>& report_fields() {
  static const std::vector<std::string> f{"time", "mass_mu", "mass_3gamma", "kinetic", "potential",
                                         "energy_mu", "pohozaev", "action_omega"};
  return f;
}

inline std::array<double, 8> report_values(const FunctionalReport& r) {
  return {r.time, r.mass_mu, r.mass_3gamma, r.kinetic, r.potential, r.energy_mu, r.pohozaev, r.action_omega};
}

inline std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV with the fixed report columns followed by monitor columns in name order.
inline void write_reports_csv(std::ostream& os, const TrajectoryRecord& rec) {
  const auto& fields = report_fields();
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i];
  for (const auto& [name, _] : rec.monitor_series) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < rec.reports.size(); ++i) {
    const auto v = report_values(rec.reports[i]);
    for (std::size_t j = 0; j < v.size(); ++j) os << (j ? "," : "") << format_g17(v[j]);
    for (const auto& [name, series] : rec.monitor_series) os << ',' << format_g17(series[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json report_json(const FunctionalReport& r) {
  nlohmann::ordered_json j;
  const auto v = report_values(r);
  for (std::size_t i = 0; i < v.size(); ++i) j[report_fields()[i]] = v[i];
  return j;
}

/// One JSON object per report line, monitors appended.
inline void write_reports_rows(std::ostream& os, const TrajectoryRecord& rec) {
  for (std::size_t i = 0; i < rec.reports.size(); ++i) {
    auto j = report_json(rec.reports[i]);
    for (const auto& [name, series] : rec.monitor_series) j[name] = series[i];
    os << j.dump() << '\n';
  }
}

/// Inverse of write_reports_rows: reports and monitor columns (no states).
inline TrajectoryRecord read_reports_rows(std::istream& is) {
  TrajectoryRecord rec;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed report row: ") + e.what());
    }
    FunctionalReport r;
    std::array<double*, 8> slots{&r.time, &r.mass_mu, &r.mass_3gamma, &r.kinetic, &r.potential, &r.energy_mu,
                                 &r.pohozaev, &r.action_omega};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!j.contains(report_fields()[i])) throw FormatError("report row lacks " + report_fields()[i]);
      *slots[i] = j[report_fields()[i]].get<double>();
    }
    for (const auto& [k, v] : j.items())
      if (std::find(report_fields().begin(), report_fields().end(), k) == report_fields().end())
        rec.monitor_series[k].push_back(v.get<double>());
    rec.reports.push_back(r);
  }
  for (const auto& [name, series] : rec.monitor_series)
    if (series.size() != rec.reports.size()) throw FormatError("monitor column " + name + " is incomplete");
  return rec;
}

inline nlohmann::ordered_json constants_json(const GroundStateSolution& gs) {
  nlohmann::ordered_json j;
  j["gamma"] = gs.gamma;
  j["K_gs"] = gs.constants.K_gs;
  j["M_gs"] = gs.constants.M_gs;
  j["E_gs"] = gs.constants.E_gs;
  j["P_gs"] = gs.constants.P_gs;
  j["C_opt"] = gs.constants.C_opt;
  j["residuals"] = {gs.residual_1, gs.residual_2};
  j["iterations"] = gs.iterations;
  j["semi_trivial"] = gs.semi_trivial;
  return j;
}

inline GroundStateConstants constants_from_json(const nlohmann::json& j) {
  GroundStateConstants c;
  try {
    c.gamma = j.at("gamma").get<double>();
    c.K_gs = j.at("K_gs").get<double>();
    c.M_gs = j.at("M_gs").get<double>();
    c.E_gs = j.at("E_gs").get<double>();
    c.P_gs = j.at("P_gs").get<double>();
    c.C_opt = j.at("C_opt").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("constants record: ") + e.what());
  }
  return c;
}

/// Series names available for plot emission: report fields plus monitor columns.
inline std::vector<std::string> plot_series_names(const TrajectoryRecord& rec) {
  std::vector<std::string> names(report_fields().begin() + 1, report_fields().end());
  for (const auto& [name, _] : rec.monitor_series) names.push_back(name);
  return names;
}

inline std::vector<double> plot_series(const TrajectoryRecord& rec, std::string name) {
  if (name == "energy") name = "energy_mu";
  if (name == "mass") name = "mass_3gamma";
  if (name == "action") name = "action_omega";
  const auto& fields = report_fields();
  for (std::size_t j = 1; j < fields.size(); ++j)
    if (fields[j] == name) {
      std::vector<double> out;
      for (const auto& r : rec.reports) out.push_back(report_values(r)[j]);
      return out;
    }
  return rec.series(name);
}

/**
 * Writes one two-column (t, value) text file per selected series into dir,
 * named <series>.dat with a '# t <series>' header. "all" selects every series.
 * Returns the written paths.
 */
inline std::vector<std::filesystem::path> emit_plot_data(const TrajectoryRecord& rec,
                                                         const std::vector<std::string>& selection,
                                                         const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& s : selection) {
    if (s == "all") {
      const auto all = plot_series_names(rec);
      names.insert(names.end(), all.begin(), all.end());
    } else {
      names.push_back(s);
    }
  }
  std::vector<std::pair<std::string, std::vector<double>>> data;
  for (const auto& n : names) data.emplace_back(n, plot_series(rec, n)); // throws on unknown names
  std::filesystem::create_directories(dir);
  const auto t = rec.times();
  std::vector<std::filesystem::path> written;
  for (const auto& [name, values] : data) {
    const auto path = dir / (name + ".dat");
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "# t " << name << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) os << format_g17(t[i]) << ' ' << format_g17(values[i]) << '\n';
    written.push_back(path);
  }
  return written;
}

inline std::vector<std::pair<double, double>> parse_plot_data(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) throw FormatError("malformed plot data line: " + line);
    rows.emplace_back(a, b);
  }
  return rows;
}

/// Two-column (r, value) table.
inline void write_radial_table(const std::filesystem::path& path, const RadialTable& t, const std::string& name) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path.string());
  os << "# r " << name << '\n';
  for (std::size_t i = 0; i < t.values.size(); ++i) os << format_g17(t.radius(i)) << ' ' << format_g17(t.values[i]) << '\n';
}

} // namespace snls

#endif
