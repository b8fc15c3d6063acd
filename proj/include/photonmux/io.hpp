#pragma once

// CSV and JSON artifacts.
//
// CSV dialect: comma separated, '.' decimal point, LF line endings, numbers
// printed with %.17g. Files open with provenance comment lines starting with
// '#', followed by a mandatory header row. Readers skip '#' lines.

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "photonmux/counting.hpp"
#include "photonmux/error.hpp"
#include "photonmux/jsa.hpp"
#include "photonmux/multiplex.hpp"
#include "photonmux/schmidt.hpp"
#include "photonmux/version.hpp"

namespace photonmux::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Provenance {
  std::string config_hash = "none";
  std::uint64_t seed = 0;
};

inline std::string provenance_line(const Provenance& p) {
  return std::string("# tool=") + kToolName + " " + kVersion + "; config_hash=" + p.config_hash +
         "; seed=" + std::to_string(p.seed) + "\n";
}

inline json provenance_json(const Provenance& p) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Data rows of a CSV file: comment lines dropped, header row first.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("malformed number '" + s + "' in " + where);
  }
}

// ---------------------------------------------------------------------------
// Joint spectral intensity: CSV (idler frequencies across, signal frequencies
// down, cells |A|²) plus a JSON sidecar that carries the exact grid.

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

inline json axis_json(const Axis& a) {
  return json{{"center_rad_s", a.center}, {"span_rad_s", a.span}, {"count", a.count}};
}

inline Axis axis_from_json(const json& j) {
  return Axis{j.at("center_rad_s").get<double>(), j.at("span_rad_s").get<double>(), j.at("count").get<int>()};
}

inline json grid_json(const FrequencyGrid& g) { return json{{"signal", axis_json(g.signal)}, {"idler", axis_json(g.idler)}}; }

inline FrequencyGrid grid_from_json(const json& j) {
  return FrequencyGrid{axis_from_json(j.at("signal")), axis_from_json(j.at("idler"))};
}

inline std::string jsi_csv(const JointSpectralIntensity& jsi, const Provenance& prov) {
  std::string s = provenance_line(prov);
  s += "# rows: signal angular frequency (rad/s); columns: idler angular frequency (rad/s); cells: |A|^2 (s^2)\n";
  s += "signal_rad_s\\idler_rad_s";
  for (int k = 0; k < jsi.grid.idler.count; ++k) s += "," + format_double(jsi.grid.idler.at(k));
  s += "\n";
  for (int j = 0; j < jsi.grid.signal.count; ++j) {
    s += format_double(jsi.grid.signal.at(j));
    for (int k = 0; k < jsi.grid.idler.count; ++k) s += "," + format_double(jsi.intensity(j, k));
    s += "\n";
  }
  return s;
}

inline json jsi_sidecar(const JointSpectralIntensity& jsi, const Provenance& prov, const json& extra = json::object()) {
  json j = provenance_json(prov);
  j["grid"] = grid_json(jsi.grid);
  j["mass"] = jsi.mass();
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

inline void write_jsi(const std::filesystem::path& csv, const JointSpectralIntensity& jsi, const Provenance& prov,
                      const json& extra = json::object()) {
  write_file(csv, jsi_csv(jsi, prov));
  write_file(sidecar_path(csv), dump(jsi_sidecar(jsi, prov, extra)));
}

/// Reads a JSI CSV. The grid comes from the sidecar when present (exact),
/// otherwise from the first and last header/row frequencies.
inline JointSpectralIntensity read_jsi(const std::filesystem::path& csv) {
  const auto rows = parse_csv(read_file(csv));
  const std::string where = csv.string();
  if (rows.size() < 3 || rows[0].size() < 3) throw Error(where + ": a JSI file needs at least 2x2 data cells");
  const int ni = static_cast<int>(rows[0].size()) - 1;
  const int ns = static_cast<int>(rows.size()) - 1;
  JointSpectralIntensity jsi;
  jsi.intensity.resize(ns, ni);
  std::vector<double> wi(static_cast<std::size_t>(ni));
  std::vector<double> ws(static_cast<std::size_t>(ns));
  for (int k = 0; k < ni; ++k) wi[static_cast<std::size_t>(k)] = parse_double(rows[0][static_cast<std::size_t>(k) + 1], where);
  for (int j = 0; j < ns; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j) + 1];
    if (static_cast<int>(r.size()) != ni + 1) throw Error(where + ": ragged row " + std::to_string(j + 1));
    ws[static_cast<std::size_t>(j)] = parse_double(r[0], where);
    for (int k = 0; k < ni; ++k) jsi.intensity(j, k) = parse_double(r[static_cast<std::size_t>(k) + 1], where);
  }
  const auto side = sidecar_path(csv);
  if (std::filesystem::exists(side)) {
    jsi.grid = grid_from_json(json::parse(read_file(side)).at("grid"));
    if (jsi.grid.signal.count != ns || jsi.grid.idler.count != ni)
      throw GridMismatchError(where + ": sidecar grid does not match the CSV shape");
  } else {
    jsi.grid.signal = Axis{0.5 * (ws.front() + ws.back()), ws.back() - ws.front(), ns};
    jsi.grid.idler = Axis{0.5 * (wi.front() + wi.back()), wi.back() - wi.front(), ni};
  }
  jsi.grid.validate();
  return jsi;
}

// ---------------------------------------------------------------------------
// Contours.

inline std::string contour_csv(const std::vector<ContourBranch>& branches, const Provenance& prov) {
  std::string s = provenance_line(prov);
  s += "branch,label,closed,pump_rad_s,signal_rad_s,idler_rad_s,pump_nm,signal_nm,idler_nm\n";
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& br = branches[b];
    for (const auto& p : br.points) {
      s += std::to_string(b) + "," + br.label + "," + (br.closed ? "1" : "0") + "," + format_double(p.pump) + "," +
           format_double(p.signal) + "," + format_double(p.idler) + "," +
           format_double(units::to_nm(units::wavelength(p.pump))) + "," +
           format_double(units::to_nm(units::wavelength(p.signal))) + "," +
           format_double(units::to_nm(units::wavelength(p.idler))) + "\n";
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports.

inline json schmidt_json(const SchmidtDecomposition& d, const std::string& input_kind, bool upper_bound) {
  json j;
  j["input"] = input_kind;
  j["upper_bound"] = upper_bound;
  json w = json::array();
  for (std::size_t m = 0; m < d.weights.size() && m < 16; ++m) w.push_back(d.weights[m]);
  j["weights"] = w;
  j["mode_count"] = d.mode_count();
  j["K"] = cooperativity(d);
  j["P"] = heralded_purity(d);
  j["g2m_predicted"] = predicted_g2m(d);
  j["reconstruction_error"] = d.reconstruction_error;
  return j;
}

inline json count_summary_json(const CountSummary& c) {
  json j;
  j["repetition_rate_hz"] = c.repetition_rate;
  j["integration_time_s"] = c.integration_time;
  json n;
  n["herald"] = c.herald;
  n["idler"] = c.idler;
  n["coincidence"] = c.coincidence;
  n["herald_1"] = c.herald_1;
  n["herald_2"] = c.herald_2;
  n["herald_1_idler"] = c.herald_1_idler;
  n["herald_2_idler"] = c.herald_2_idler;
  n["herald_12_idler"] = c.herald_12_idler;
  if (c.herald_12) n["herald_12"] = *c.herald_12;
  n["idler_1"] = c.idler_1;
  n["idler_2"] = c.idler_2;
  n["idler_12"] = c.idler_12;
  n["herald_idler_1"] = c.herald_idler_1;
  n["herald_idler_2"] = c.herald_idler_2;
  n["herald_idler_12"] = c.herald_idler_12;
  j["counts"] = n;
  return j;
}

inline json mux_record_json(const MuxRunRecord& r) {
  json j;
  j["pulses"] = r.pulses;
  j["repetition_rate_hz"] = r.repetition_rate;
  j["herald"] = r.herald;
  j["herald_idler"] = r.herald_idler;
  j["herald_any"] = r.herald_any;
  j["herald_multi"] = r.herald_multi;
  j["idler"] = r.idler;
  j["herald_any_idler"] = r.herald_any_idler;
  j["herald_multi_idler"] = r.herald_multi_idler;
  j["idler_1"] = r.idler_1;
  j["idler_2"] = r.idler_2;
  j["idler_12"] = r.idler_12;
  j["herald_idler_1"] = r.herald_idler_1;
  j["herald_idler_2"] = r.herald_idler_2;
  j["herald_idler_12"] = r.herald_idler_12;
  return j;
}

/// {car, car_err, g2m, g2m_err, g2h, g2h_err, rates}; an estimator whose
/// denominator vanishes is reported as null.
inline json metrics_json(const CountSummary& c, bool multiplexed) {
  json j;
  auto put = [&](const char* key, auto&& estimator) {
    try {
      const Estimate e = estimator(c);
      j[key] = e.value;
      j[std::string(key) + "_err"] = e.error;
    } catch (const EstimatorError&) {
      j[key] = nullptr;
      j[std::string(key) + "_err"] = nullptr;
    }
  };
  if (multiplexed)
    put("car", car_multiplexed);
  else
    put("car", car_single);
  put("g2m", g2_marginal);
  put("g2h", g2_heralded);
  json r;
  r["herald_hz"] = c.rate(c.herald);
  r["idler_hz"] = c.rate(c.idler);
  r["coincidence_hz"] = c.rate(c.coincidence);
  j["rates"] = r;
  return j;
}

}  // namespace photonmux::io
