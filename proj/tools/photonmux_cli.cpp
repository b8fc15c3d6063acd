// photonmux command-line front end.
//
//   photonmux jsa        --config run.yaml
//   photonmux schmidt    path/to/jsi.csv
//   photonmux sweep-g2m  --config run.yaml
//   photonmux multiplex  --config run.yaml
//   photonmux tomography --config run.yaml
//
// Exit status: 0 when every artifact was written and re-read successfully,
// 2 for configuration or usage errors, 1 for anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "photonmux/photonmux.hpp"

namespace fs = std::filesystem;
using namespace photonmux;
using io::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pulses;
  std::optional<std::string> out;
  std::optional<double> pump_bandwidth_nm;
  std::optional<unsigned> threads;
};

// Precedence: command-line flag, then environment, then file.
RunConfig resolve_config(const GlobalOptions& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this subcommand");
  RunConfig c = load_config(g.config_path);
  apply_environment(c);
  if (g.seed) c.run.seed = *g.seed;
  if (g.pulses) c.run.pulses = *g.pulses;
  if (g.out) c.run.output_dir = *g.out;
  if (g.pump_bandwidth_nm) c.pump.bandwidth_nm = *g.pump_bandwidth_nm;
  if (g.threads) c.run.threads = *g.threads;
  c.validate();
  return c;
}

io::Provenance provenance(const RunConfig& c) { return {c.hash(), c.run.seed}; }

RunOptions run_options(const RunConfig& c, std::uint64_t pulses) { return {pulses, c.run.seed, c.run.threads}; }

// Artifacts are re-read after writing; a file that does not parse back is a
// failure of the run.
void check_csv(const fs::path& path, std::size_t data_rows) {
  const auto rows = io::parse_csv(io::read_file(path));
  if (rows.size() != data_rows + 1) throw Error(path.string() + ": unexpected row count after writing");
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw Error(path.string() + ": ragged table after writing");
}

void write_json(const fs::path& path, const json& j) {
  io::write_file(path, io::dump(j));
  if (json::parse(io::read_file(path)).is_discarded()) throw Error(path.string() + ": invalid JSON after writing");
}

void write_effective_config(const RunConfig& c) {
  json j = io::provenance_json(provenance(c));
  j["config"] = c.to_json();
  write_json(fs::path(c.run.output_dir) / "run_config.json", j);
}

std::string cell(double x) { return io::format_double(x); }

std::string cell(const std::optional<double>& x) { return x ? io::format_double(*x) : std::string(); }

double nm_of(double omega) { return units::to_nm(units::wavelength(omega)); }

JointSpectralAmplitude reference_jsa(const RunConfig& c, const PumpEnvelope& pump) {
  const auto model = c.dispersion.model();
  const auto grid = default_grid(model, pump, c.grid.signal_points, c.grid.idler_points, c.grid.span_factor);
  return build_jsa(model, pump, grid);
}

std::vector<double> source_weights(const RunConfig& c) {
  if (c.source.schmidt_weights) {
    auto w = *c.source.schmidt_weights;
    double s = 0.0;
    for (double x : w) s += x;
    if (!(s > 0.0)) throw ConfigError("source.schmidt_weights sum to zero");
    for (double& x : w) x /= s;
    return w;
  }
  return schmidt_decompose(reference_jsa(c, c.pump.envelope())).weights;
}

// ---------------------------------------------------------------------------

int cmd_jsa(const GlobalOptions& g) {
  const RunConfig c = resolve_config(g);
  const fs::path out = c.run.output_dir;
  const auto prov = provenance(c);
  const auto model = c.dispersion.model();
  const auto pump = c.pump.envelope();
  const auto op = operating_point(model, pump.omega);
  const auto jsa = reference_jsa(c, pump);
  const auto jsi = jsa.intensity();

  json extra;
  extra["pump"] = {{"wavelength_nm", c.pump.wavelength_nm},
                   {"bandwidth_rms_nm", c.pump.bandwidth_nm},
                   {"sigma_rad_s", pump.sigma}};
  extra["operating_point"] = {{"signal_nm", nm_of(op.signal)},
                              {"idler_nm", nm_of(op.idler)},
                              {"phasematching_bandwidth_rad_s", op.phasematching_bandwidth}};
  const fs::path jsi_path = out / "jsi.csv";
  io::write_jsi(jsi_path, jsi, prov, extra);
  const auto back = io::read_jsi(jsi_path);
  if (!(back.grid == jsi.grid)) throw Error("JSI sidecar grid did not round-trip");
  if (std::abs(back.mass() - 1.0) > 1e-9) throw Error("written JSI is not normalised");

  const auto w = model.window();
  const auto branches = phasematching_contour(model, w.lo, w.hi, 4001);
  const fs::path contour_path = out / "contour.csv";
  io::write_file(contour_path, io::contour_csv(branches, prov));
  std::size_t points = 0;
  for (const auto& b : branches) points += b.points.size();
  check_csv(contour_path, points);
  write_effective_config(c);

  int closed = 0;
  for (const auto& b : branches) closed += b.closed ? 1 : 0;
  std::printf("jsi: %s (%d x %d, signal %.2f nm, idler %.2f nm)\n", jsi_path.c_str(), jsi.grid.signal.count,
              jsi.grid.idler.count, nm_of(op.signal), nm_of(op.idler));
  std::printf("contour: %s (%zu branches, %d closed)\n", contour_path.c_str(), branches.size(), closed);
  return 0;
}

int cmd_schmidt(const GlobalOptions& g, const std::string& input) {
  std::optional<RunConfig> c;
  if (!g.config_path.empty()) c = resolve_config(g);
  io::Provenance prov;
  if (c) prov = provenance(*c);
  if (g.seed) prov.seed = *g.seed;
  const fs::path out = c ? fs::path(c->run.output_dir) : fs::path(g.out.value_or("out"));

  const auto jsi = io::read_jsi(input);
  json j = io::provenance_json(prov);
  j["input_file"] = fs::path(input).filename().string();
  j["grid"] = io::grid_json(jsi.grid);
  // Phase is unknown for an intensity file, so every purity is an upper bound.
  const auto abs = schmidt_decompose(jsi, MagnitudeKind::magnitude);
  const auto sq = schmidt_decompose(jsi, MagnitudeKind::intensity);
  j["K"] = cooperativity(abs);
  j["P"] = heralded_purity(abs);
  j["g2m_predicted"] = predicted_g2m(abs);
  j["upper_bound"] = true;
  j["variants"] = json::array({io::schmidt_json(abs, to_string(MagnitudeKind::magnitude), true),
                               io::schmidt_json(sq, to_string(MagnitudeKind::intensity), true)});
  const fs::path path = out / "schmidt.json";
  write_json(path, j);
  std::printf("schmidt: %s (K %.6f, P %.6f from |f|; P %.6f from |f|^2)\n", path.c_str(), cooperativity(abs),
              heralded_purity(abs), heralded_purity(sq));
  return 0;
}

int cmd_sweep_g2m(const GlobalOptions& g) {
  const RunConfig c = resolve_config(g);
  const fs::path out = c.run.output_dir;
  const auto prov = provenance(c);
  SwitchNetwork lossless;
  lossless.sources = 1;
  lossless.switch_loss_db = lossless.delay_loss_db = lossless.polariser_loss_db = 0.0;

  std::string csv = io::provenance_line(prov);
  csv += "# g2m_mc: lossless 50:50 split of one arm, mean_pairs=" + cell(c.sweep_g2m.mean_pairs) +
         ", pulses=" + std::to_string(c.sweep_g2m.pulses) + "\n";
  csv += "bandwidth_rms_nm,sigma_rad_s,K,P,g2m_predicted,g2m_mc,g2m_mc_err\n";
  const auto sweep = c.pump.sweep();
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const auto pump = c.pump.envelope(sweep[k]);
    const auto d = schmidt_decompose(reference_jsa(c, pump));
    std::optional<double> mc, mc_err;
    if (c.sweep_g2m.monte_carlo) {
      SourceModel s;
      s.weights = d.weights;
      s.mean_pairs = c.sweep_g2m.mean_pairs;
      s.repetition_rate = c.source.repetition_rate_hz;
      const auto rec = run_single_source(s, lossless, run_options(c, c.sweep_g2m.pulses), static_cast<std::uint32_t>(k));
      const auto e = g2_marginal(rec.summary());
      mc = e.value;
      mc_err = e.error;
    }
    csv += cell(sweep[k]) + "," + cell(pump.sigma) + "," + cell(cooperativity(d)) + "," + cell(heralded_purity(d)) +
           "," + cell(predicted_g2m(d)) + "," + cell(mc) + "," + cell(mc_err) + "\n";
  }
  const fs::path path = out / "sweep_g2m.csv";
  io::write_file(path, csv);
  check_csv(path, sweep.size());
  write_effective_config(c);
  std::printf("sweep-g2m: %s (%zu bandwidths)\n", path.c_str(), sweep.size());
  return 0;
}

int cmd_multiplex(const GlobalOptions& g, std::uint64_t pulse_log_rows) {
  const RunConfig c = resolve_config(g);
  if (c.network.sources < 2) throw ConfigError("multiplex needs network.sources >= 2");
  const fs::path out = c.run.output_dir;
  const auto prov = provenance(c);
  const auto weights = source_weights(c);
  const auto n = static_cast<std::size_t>(c.network.sources);
  std::vector<double> mus = c.multiplex.mean_pairs_sweep;
  if (mus.empty()) mus.push_back(c.source.effective_mean_pairs());

  std::string csv = io::provenance_line(prov);
  csv +=
      "configuration,mean_pairs,pulses,integration_time_s,herald_rate_hz,coincidence_rate_hz,"
      "coincidence_rate_exact_hz,car,car_err,g2h,g2h_err,enhancement\n";
  json records = json::array();
  std::size_t rows = 0;
  for (double mu : mus) {
    const SourceModel src = c.source.model(weights, mu);
    const auto opt = run_options(c, c.run.pulses);
    std::vector<MuxRunRecord> singles;
    for (std::size_t k = 0; k < n; ++k) singles.push_back(run_single_source(src, c.network, opt, static_cast<std::uint32_t>(k)));
    const std::vector<SourceModel> sources(n, src);
    const auto mux = run_multiplexed(sources, c.network, opt);
    const double pulses = static_cast<double>(opt.pulses);
    const auto exact_single = expected_counts(src, c.network, pulses, c.source.photon_cutoff);
    const auto exact_mux = expected_counts(sources, c.network, pulses, c.source.photon_cutoff);

    auto row = [&](const std::string& name, const MuxRunRecord& r, const CountSummary& exact, bool multiplexed,
                   std::optional<double> enhancement) {
      const auto s = r.summary();
      Estimate car{}, g2h{};
      std::optional<double> car_v, car_e, g2h_v, g2h_e;
      try {
        car = (multiplexed && n == 2) ? car_multiplexed(s) : car_single(s);
        car_v = car.value;
        car_e = car.error;
      } catch (const EstimatorError&) {
      }
      try {
        g2h = g2_heralded(s);
        g2h_v = g2h.value;
        g2h_e = g2h.error;
      } catch (const EstimatorError&) {
      }
      csv += name + "," + cell(mu) + "," + std::to_string(r.pulses) + "," + cell(s.integration_time) + "," +
             cell(s.rate(s.herald)) + "," + cell(s.rate(s.coincidence)) + "," + cell(exact.rate(exact.coincidence)) +
             "," + cell(car_v) + "," + cell(car_e) + "," + cell(g2h_v) + "," + cell(g2h_e) + "," + cell(enhancement) +
             "\n";
      ++rows;
      json j;
      j["configuration"] = name;
      j["mean_pairs"] = mu;
      j["record"] = io::mux_record_json(r);
      j["metrics"] = io::metrics_json(s, multiplexed && n == 2);
      records.push_back(j);
    };
    for (std::size_t k = 0; k < n; ++k)
      row("source_" + std::to_string(k + 1), singles[k], exact_single, false, std::nullopt);
    row("multiplexed", mux, exact_mux, true, enhancement_factor(mux, singles));
  }
  const fs::path path = out / "multiplex.csv";
  io::write_file(path, csv);
  check_csv(path, rows);
  json doc = io::provenance_json(prov);
  doc["runs"] = records;
  write_json(out / "multiplex_records.json", doc);

  if (pulse_log_rows > 0) {
    const auto log = pulse_log(c.source.model(weights, mus.front()), c.run.seed, pulse_log_rows);
    std::string s = io::provenance_line(prov);
    s += "pulse,pairs,herald_photons,signal_photons,herald_click,signal_click\n";
    for (const auto& r : log)
      s += std::to_string(r.pulse) + "," + std::to_string(r.pairs) + "," + std::to_string(r.herald_photons) + "," +
           std::to_string(r.signal_photons) + "," + (r.herald_click ? "1" : "0") + "," + (r.signal_click ? "1" : "0") +
           "\n";
    const fs::path lp = out / "pulse_log.csv";
    io::write_file(lp, s);
    check_csv(lp, log.size());
  }
  write_effective_config(c);
  std::printf("multiplex: %s (%zu rows)\n", path.c_str(), rows);
  return 0;
}

int cmd_tomography(const GlobalOptions& g) {
  const RunConfig c = resolve_config(g);
  const fs::path out = c.run.output_dir;
  const auto prov = provenance(c);
  std::vector<double> pumps = c.tomography.pump_wavelengths_nm;
  if (pumps.empty()) pumps.push_back(c.pump.wavelength_nm);

  json doc = io::provenance_json(prov);
  json settings = json::array();
  for (std::size_t k = 0; k < pumps.size(); ++k) {
    PumpConfig pc = c.pump;
    pc.wavelength_nm = pumps[k];
    const auto pump = pc.envelope();
    const auto jsa = reference_jsa(c, pump);
    const auto& axis = jsa.grid.idler;
    TomographyOptions opt;
    if (c.tomography.osa_resolution_nm > 0.0)
      opt.osa_resolution = units::bandwidth_rad_s(units::nm(c.tomography.osa_resolution_nm),
                                                   units::wavelength(jsa.grid.signal.center));
    const auto rec = reconstruct_jsi(jsa, uniform_sweep(axis.front(), axis.back(), c.tomography.seed_points), opt);

    const auto truth = jsa.intensity();
    const auto d_true = schmidt_decompose(jsa);
    const auto d_true_abs = schmidt_decompose(truth, MagnitudeKind::magnitude);
    const auto d_rec = schmidt_decompose(rec.jsi, MagnitudeKind::magnitude);
    const auto m = marginal_moments(rec.jsi);

    json extra;
    extra["pump_wavelength_nm"] = pumps[k];
    extra["sweep"] = {{"seeds_rad_s", rec.sweep.seeds},
                      {"reversed", rec.sweep.reversed},
                      {"osa_resolution_rad_s", rec.sweep.osa_resolution}};
    const std::string stem = "tomography_" + std::to_string(k + 1);
    io::write_jsi(out / (stem + ".csv"), rec.jsi, prov, extra);
    const auto back = io::read_jsi(out / (stem + ".csv"));
    if (!(back.grid == rec.jsi.grid)) throw Error("reconstructed JSI grid did not round-trip");

    json s;
    s["file"] = stem + ".csv";
    s["pump_wavelength_nm"] = pumps[k];
    s["seed_points"] = c.tomography.seed_points;
    s["l2_error"] = reconstruction_error(rec.jsi, truth);
    s["K_true"] = cooperativity(d_true);
    s["K_true_abs"] = cooperativity(d_true_abs);
    s["K_reconstructed_abs"] = cooperativity(d_rec);
    s["P_reconstructed_abs"] = heralded_purity(d_rec);
    s["signal_centroid_nm"] = nm_of(m.signal_mean);
    s["idler_centroid_nm"] = nm_of(m.idler_mean);
    s["signal_rms_rad_s"] = m.signal_rms;
    s["idler_rms_rad_s"] = m.idler_rms;
    settings.push_back(s);
  }
  doc["settings"] = settings;
  const fs::path path = out / "tomography.json";
  write_json(path, doc);
  write_effective_config(c);
  std::printf("tomography: %s (%zu pump settings)\n", path.c_str(), pumps.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded-photon source simulator: joint spectra, Schmidt analysis, multiplexing, tomography"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "YAML run configuration");
  app.add_option("--seed", g.seed, "RNG seed (overrides PHOTONMUX_SEED and the config)");
  app.add_option("--pulses", g.pulses, "pulses per Monte Carlo run")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--pump-bandwidth", g.pump_bandwidth_nm, "pump RMS bandwidth in nm")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");

  auto* jsa = app.add_subcommand("jsa", "normalised JSI and phasematching contours");
  auto* schmidt = app.add_subcommand("schmidt", "Schmidt analysis of a JSI file");
  std::string schmidt_input;
  schmidt->add_option("input", schmidt_input, "JSI CSV file")->required();
  auto* sweep = app.add_subcommand("sweep-g2m", "marginal g2 against pump bandwidth");
  auto* mux = app.add_subcommand("multiplex", "single-source and multiplexed runs over a mean-pair sweep");
  std::uint64_t pulse_log_rows = 0;
  mux->add_option("--pulse-log", pulse_log_rows, "write the first N pulses of source 1 (at most 100000)");
  auto* tomo = app.add_subcommand("tomography", "stimulated emission tomography reconstruction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*jsa) return cmd_jsa(g);
    if (*schmidt) return cmd_schmidt(g, schmidt_input);
    if (*sweep) return cmd_sweep_g2m(g);
    if (*mux) return cmd_multiplex(g, pulse_log_rows);
    if (*tomo) return cmd_tomography(g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
