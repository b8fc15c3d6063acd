#pragma once

// Run configuration read from YAML. Every physical quantity carries its unit
// in the key name; unknown keys are rejected with their line number.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "photonmux/dispersion.hpp"
#include "photonmux/error.hpp"
#include "photonmux/io.hpp"
#include "photonmux/jsa.hpp"
#include "photonmux/multiplex.hpp"
#include "photonmux/statistics.hpp"
#include "photonmux/units.hpp"

namespace photonmux {

struct DispersionConfig {
  double reference_wavelength_nm = 1064.0;
  double beta2_s2_per_m = 0.0;
  double beta3_s3_per_m = 0.0;
  double beta4_s4_per_m = 0.0;
  double gamma_per_w_m = 0.0;
  double length_m = 1.0;
  double pump_power_w = 0.0;
  double window_fraction = 0.4;

  DispersionModel model() const {
    DispersionModel m;
    m.omega0 = units::angular_frequency(units::nm(reference_wavelength_nm));
    m.beta2 = beta2_s2_per_m;
    m.beta3 = beta3_s3_per_m;
    m.beta4 = beta4_s4_per_m;
    m.gamma = gamma_per_w_m;
    m.length = length_m;
    m.pump_power = pump_power_w;
    m.window_fraction = window_fraction;
    return m;
  }
};

struct PumpConfig {
  double wavelength_nm = 1064.0;
  double bandwidth_nm = 1.0;  // RMS
  double sweep_min_nm = 1.0;
  double sweep_max_nm = 20.0;
  int sweep_points = 20;

  PumpEnvelope envelope(double rms_nm) const {
    const double lambda = units::nm(wavelength_nm);
    return PumpEnvelope{units::angular_frequency(lambda), units::bandwidth_rad_s(units::nm(rms_nm), lambda)};
  }
  PumpEnvelope envelope() const { return envelope(bandwidth_nm); }

  std::vector<double> sweep() const {
    if (sweep_points == 1) return {sweep_min_nm};
    std::vector<double> v(static_cast<std::size_t>(sweep_points));
    for (int k = 0; k < sweep_points; ++k)
      v[static_cast<std::size_t>(k)] = sweep_min_nm + (sweep_max_nm - sweep_min_nm) * k / (sweep_points - 1);
    return v;
  }
};

struct GridConfig {
  int signal_points = 256;
  int idler_points = 256;
  double span_factor = 5.0;
};

struct SourceConfig {
  std::optional<double> mean_pairs;  // default: from single_pair_probability
  double single_pair_probability = 0.01;
  double herald_loss_db = 5.6;
  double signal_loss_db = 5.0;
  double herald_background_probability = 0.0;
  double signal_background_probability = 0.0;
  double repetition_rate_hz = 10e6;
  std::optional<std::vector<double>> schmidt_weights;  // default: from the JSA
  int photon_cutoff = 12;

  double effective_mean_pairs() const {
    return mean_pairs ? *mean_pairs : mean_pairs_for_single_pair_probability(single_pair_probability);
  }

  SourceModel model(const std::vector<double>& weights, double mu) const {
    SourceModel s;
    s.weights = weights;
    s.mean_pairs = mu;
    s.herald_efficiency = units::transmission_from_db(herald_loss_db);
    s.signal_transmission = units::transmission_from_db(signal_loss_db);
    s.herald_background = herald_background_probability;
    s.signal_background = signal_background_probability;
    s.repetition_rate = repetition_rate_hz;
    return s;
  }
};

struct MultiplexConfig {
  std::vector<double> mean_pairs_sweep;  // empty: the source default only
};

struct SweepG2mConfig {
  bool monte_carlo = true;
  double mean_pairs = 0.02;
  std::uint64_t pulses = 2'000'000;
};

struct TomographyConfig {
  int seed_points = 128;
  std::vector<double> pump_wavelengths_nm;  // empty: the configured pump only
  double osa_resolution_nm = 0.0;
};

struct RunSettings {
  std::uint64_t pulses = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output_dir = "out";
};

struct RunConfig {
  DispersionConfig dispersion;
  PumpConfig pump;
  GridConfig grid;
  SourceConfig source;
  SwitchNetwork network;
  MultiplexConfig multiplex;
  SweepG2mConfig sweep_g2m;
  TomographyConfig tomography;
  RunSettings run;

  void validate() const;
  io::json to_json() const;
  std::string hash() const;
};

namespace detail {

inline int yaml_line(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

/// Typed access to one YAML mapping; `finish` rejects keys never asked for.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError("'" + path_ + "' must be a mapping", yaml_line(node_));
  }

  bool present() const { return node_ && node_.IsMap(); }

  YAML::Node child(const std::string& key) {
    known_.insert(key);
    if (!present()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    return map[key];
  }

  template <class T>
  void get(const std::string& key, T& target) {
    const YAML::Node n = child(key);
    if (!n || n.IsNull()) return;
    if (!n.IsScalar()) throw ConfigError("'" + name(key) + "' must be a scalar", yaml_line(n));
    try {
      target = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + name(key) + "' has an invalid value '" + n.Scalar() + "'", yaml_line(n));
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& target) {
    const YAML::Node n = child(key);
    if (!n || n.IsNull()) return;
    T v{};
    get(key, v);
    target = v;
  }

  void get_list(const std::string& key, std::vector<double>& target) {
    const YAML::Node n = child(key);
    if (!n || n.IsNull()) return;
    if (!n.IsSequence()) throw ConfigError("'" + name(key) + "' must be a list of numbers", yaml_line(n));
    target.clear();
    for (const auto& e : n) {
      try {
        target.push_back(e.as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("'" + name(key) + "' must be a list of numbers", yaml_line(e));
      }
    }
  }

  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ConfigError("unknown key '" + name(key) + "'", yaml_line(kv.first));
    }
  }

  int line(const std::string& key) const {
    if (!present()) return 0;
    const YAML::Node& map = node_;
    return map[key] ? yaml_line(map[key]) : yaml_line(node_);
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline void RunConfig::validate() const {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(dispersion.reference_wavelength_nm, "dispersion.reference_wavelength_nm");
  positive(dispersion.length_m, "dispersion.length_m");
  if (!(dispersion.gamma_per_w_m >= 0.0)) throw ConfigError("dispersion.gamma_per_w_m must be >= 0");
  if (!(dispersion.pump_power_w >= 0.0)) throw ConfigError("dispersion.pump_power_w must be >= 0");
  if (!(dispersion.window_fraction > 0.0 && dispersion.window_fraction < 1.0))
    throw ConfigError("dispersion.window_fraction must lie in (0, 1)");
  positive(pump.wavelength_nm, "pump.wavelength_nm");
  positive(pump.bandwidth_nm, "pump.bandwidth_rms_nm");
  positive(pump.sweep_min_nm, "pump.sweep.bandwidth_min_nm");
  if (pump.sweep_points < 1) throw ConfigError("pump.sweep.points must be >= 1");
  if (pump.sweep_points > 1 && !(pump.sweep_max_nm > pump.sweep_min_nm))
    throw ConfigError("pump.sweep.bandwidth_max_nm must exceed bandwidth_min_nm");
  if (grid.signal_points < 2 || grid.idler_points < 2) throw ConfigError("grid needs at least 2 points per axis");
  positive(grid.span_factor, "grid.span_factor");
  if (source.mean_pairs && !(*source.mean_pairs >= 0.0)) throw ConfigError("source.mean_pairs must be >= 0");
  if (!(source.single_pair_probability > 0.0 && source.single_pair_probability <= 0.25))
    throw ConfigError("source.single_pair_probability must lie in (0, 0.25]");
  if (!(source.herald_loss_db >= 0.0) || !(source.signal_loss_db >= 0.0))
    throw ConfigError("source losses must be >= 0 dB");
  for (double b : {source.herald_background_probability, source.signal_background_probability})
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("background probabilities must lie in [0, 1)");
  positive(source.repetition_rate_hz, "source.repetition_rate_hz");
  if (source.photon_cutoff < 1) throw ConfigError("source.photon_cutoff must be >= 1");
  if (source.schmidt_weights) {
    if (source.schmidt_weights->empty()) throw ConfigError("source.schmidt_weights must not be empty");
    for (double w : *source.schmidt_weights)
      if (!(w >= 0.0)) throw ConfigError("source.schmidt_weights must be non-negative");
  }
  network.validate();
  for (double mu : multiplex.mean_pairs_sweep)
    if (!(mu >= 0.0)) throw ConfigError("multiplex.mean_pairs_sweep entries must be >= 0");
  if (!(sweep_g2m.mean_pairs > 0.0)) throw ConfigError("sweep_g2m.mean_pairs must be positive");
  if (sweep_g2m.pulses < 1) throw ConfigError("sweep_g2m.pulses must be >= 1");
  if (tomography.seed_points < 2) throw ConfigError("tomography.seed_points must be >= 2");
  if (!(tomography.osa_resolution_nm >= 0.0)) throw ConfigError("tomography.osa_resolution_rms_nm must be >= 0");
  if (run.pulses < 1) throw ConfigError("run.pulses must be >= 1");
}

inline io::json RunConfig::to_json() const {
  io::json j;
  auto& d = j["dispersion"];
  d["reference_wavelength_nm"] = dispersion.reference_wavelength_nm;
  d["beta2_s2_per_m"] = dispersion.beta2_s2_per_m;
  d["beta3_s3_per_m"] = dispersion.beta3_s3_per_m;
  d["beta4_s4_per_m"] = dispersion.beta4_s4_per_m;
  d["gamma_per_w_m"] = dispersion.gamma_per_w_m;
  d["length_m"] = dispersion.length_m;
  d["pump_power_w"] = dispersion.pump_power_w;
  d["window_fraction"] = dispersion.window_fraction;
  auto& p = j["pump"];
  p["wavelength_nm"] = pump.wavelength_nm;
  p["bandwidth_rms_nm"] = pump.bandwidth_nm;
  p["sweep"] = {{"bandwidth_min_nm", pump.sweep_min_nm},
                {"bandwidth_max_nm", pump.sweep_max_nm},
                {"points", pump.sweep_points}};
  j["grid"] = {{"signal_points", grid.signal_points},
               {"idler_points", grid.idler_points},
               {"span_factor", grid.span_factor}};
  auto& s = j["source"];
  s["mean_pairs"] = source.mean_pairs ? io::json(*source.mean_pairs) : io::json(nullptr);
  s["single_pair_probability"] = source.single_pair_probability;
  s["herald_loss_db"] = source.herald_loss_db;
  s["signal_loss_db"] = source.signal_loss_db;
  s["herald_background_probability"] = source.herald_background_probability;
  s["signal_background_probability"] = source.signal_background_probability;
  s["repetition_rate_hz"] = source.repetition_rate_hz;
  s["schmidt_weights"] = source.schmidt_weights ? io::json(*source.schmidt_weights) : io::json("jsa");
  s["photon_cutoff"] = source.photon_cutoff;
  j["network"] = {{"sources", network.sources},
                  {"switch_loss_db", network.switch_loss_db},
                  {"delay_loss_db", network.delay_loss_db},
                  {"polariser_loss_db", network.polariser_loss_db},
                  {"policy", to_string(network.policy)}};
  j["multiplex"] = {{"mean_pairs_sweep", multiplex.mean_pairs_sweep}};
  j["sweep_g2m"] = {{"monte_carlo", sweep_g2m.monte_carlo},
                    {"mean_pairs", sweep_g2m.mean_pairs},
                    {"pulses", sweep_g2m.pulses}};
  j["tomography"] = {{"seed_points", tomography.seed_points},
                     {"pump_wavelengths_nm", tomography.pump_wavelengths_nm},
                     {"osa_resolution_rms_nm", tomography.osa_resolution_nm}};
  // The output directory is deliberately left out: moving the output
  // elsewhere must not change the hash.
  j["run"] = {{"pulses", run.pulses}, {"seed", run.seed}};
  return j;
}

/// FNV-1a 64 of the effective configuration, 16 hex digits.
inline std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a64(to_json().dump())));
  return buf;
}

inline RunConfig parse_config(const YAML::Node& root) {
  if (!root || root.IsNull()) throw ConfigError("configuration is empty");
  RunConfig c;
  detail::Section top(root, "");

  detail::Section d(top.child("dispersion"), "dispersion");
  d.get("reference_wavelength_nm", c.dispersion.reference_wavelength_nm);
  d.get("beta2_s2_per_m", c.dispersion.beta2_s2_per_m);
  d.get("beta3_s3_per_m", c.dispersion.beta3_s3_per_m);
  d.get("beta4_s4_per_m", c.dispersion.beta4_s4_per_m);
  d.get("gamma_per_w_m", c.dispersion.gamma_per_w_m);
  d.get("length_m", c.dispersion.length_m);
  d.get("pump_power_w", c.dispersion.pump_power_w);
  d.get("window_fraction", c.dispersion.window_fraction);
  d.finish();

  detail::Section p(top.child("pump"), "pump");
  p.get("wavelength_nm", c.pump.wavelength_nm);
  p.get("bandwidth_rms_nm", c.pump.bandwidth_nm);
  detail::Section ps(p.child("sweep"), "pump.sweep");
  ps.get("bandwidth_min_nm", c.pump.sweep_min_nm);
  ps.get("bandwidth_max_nm", c.pump.sweep_max_nm);
  ps.get("points", c.pump.sweep_points);
  ps.finish();
  p.finish();

  detail::Section g(top.child("grid"), "grid");
  g.get("signal_points", c.grid.signal_points);
  g.get("idler_points", c.grid.idler_points);
  g.get("span_factor", c.grid.span_factor);
  g.finish();

  detail::Section s(top.child("source"), "source");
  s.get("mean_pairs", c.source.mean_pairs);
  s.get("single_pair_probability", c.source.single_pair_probability);
  s.get("herald_loss_db", c.source.herald_loss_db);
  s.get("signal_loss_db", c.source.signal_loss_db);
  s.get("herald_background_probability", c.source.herald_background_probability);
  s.get("signal_background_probability", c.source.signal_background_probability);
  s.get("repetition_rate_hz", c.source.repetition_rate_hz);
  s.get("photon_cutoff", c.source.photon_cutoff);
  {
    const YAML::Node w = s.child("schmidt_weights");
    if (w && w.IsScalar()) {
      if (w.Scalar() != "jsa") throw ConfigError("'source.schmidt_weights' must be 'jsa' or a list", detail::yaml_line(w));
    } else if (w) {
      std::vector<double> v;
      s.get_list("schmidt_weights", v);
      c.source.schmidt_weights = v;
    }
  }
  s.finish();

  detail::Section n(top.child("network"), "network");
  n.get("sources", c.network.sources);
  n.get("switch_loss_db", c.network.switch_loss_db);
  n.get("delay_loss_db", c.network.delay_loss_db);
  n.get("polariser_loss_db", c.network.polariser_loss_db);
  {
    std::string policy = to_string(c.network.policy);
    n.get("policy", policy);
    try {
      c.network.policy = routing_policy_from_string(policy);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), n.line("policy"));
    }
  }
  n.finish();

  detail::Section m(top.child("multiplex"), "multiplex");
  m.get_list("mean_pairs_sweep", c.multiplex.mean_pairs_sweep);
  m.finish();

  detail::Section sg(top.child("sweep_g2m"), "sweep_g2m");
  sg.get("monte_carlo", c.sweep_g2m.monte_carlo);
  sg.get("mean_pairs", c.sweep_g2m.mean_pairs);
  sg.get("pulses", c.sweep_g2m.pulses);
  sg.finish();

  detail::Section t(top.child("tomography"), "tomography");
  t.get("seed_points", c.tomography.seed_points);
  t.get_list("pump_wavelengths_nm", c.tomography.pump_wavelengths_nm);
  t.get("osa_resolution_rms_nm", c.tomography.osa_resolution_nm);
  t.finish();

  detail::Section r(top.child("run"), "run");
  r.get("pulses", c.run.pulses);
  r.get("seed", c.run.seed);
  r.get("threads", c.run.threads);
  r.get("output_dir", c.run.output_dir);
  r.finish();

  top.finish();
  return c;
}

inline RunConfig load_config_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  return parse_config(root);
}

inline RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return load_config_string(text);
}

/// Applies PHOTONMUX_SEED, PHOTONMUX_PULSES, PHOTONMUX_OUT and
/// PHOTONMUX_THREADS. `lookup` defaults to std::getenv.
inline void apply_environment(RunConfig& c,
                              const std::function<const char*(const char*)>& lookup = [](const char* k) {
                                return std::getenv(k);
                              }) {
  auto unsigned_value = [&](const char* key, auto& target) {
    const char* v = lookup(key);
    if (!v) return;
    try {
      std::size_t used = 0;
      const std::string s(v);
      if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
      const unsigned long long x = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      target = static_cast<std::remove_reference_t<decltype(target)>>(x);
    } catch (const std::exception&) {
      throw ConfigError(std::string("environment variable ") + key + " is not a non-negative integer: '" + v + "'");
    }
  };
  unsigned_value("PHOTONMUX_SEED", c.run.seed);
  unsigned_value("PHOTONMUX_PULSES", c.run.pulses);
  unsigned_value("PHOTONMUX_THREADS", c.run.threads);
  if (const char* v = lookup("PHOTONMUX_OUT")) c.run.output_dir = v;
}

}  // namespace photonmux
