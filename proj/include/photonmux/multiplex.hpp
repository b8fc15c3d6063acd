#pragma once

// Pulse-by-pulse simulation of N heralded sources behind a tree of 2×1
// switches with feed-forward routing. Counts are integers, so the merged
// record does not depend on how pulses were split across threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "photonmux/counting.hpp"
#include "photonmux/error.hpp"
#include "photonmux/rng.hpp"
#include "photonmux/statistics.hpp"
#include "photonmux/units.hpp"

namespace photonmux {

enum class RoutingPolicy {
  priority_last,   // highest-index heralding source wins (source 2 of 2)
  priority_first,  // lowest-index heralding source wins
  random,          // uniform choice among heralding sources
};

inline const char* to_string(RoutingPolicy p) {
  switch (p) {
    case RoutingPolicy::priority_last: return "priority_last";
    case RoutingPolicy::priority_first: return "priority_first";
    case RoutingPolicy::random: return "random";
  }
  return "?";
}

inline RoutingPolicy routing_policy_from_string(const std::string& s) {
  if (s == "priority_last") return RoutingPolicy::priority_last;
  if (s == "priority_first") return RoutingPolicy::priority_first;
  if (s == "random") return RoutingPolicy::random;
  throw DomainError("unknown routing policy '" + s + "' (expected priority_last, priority_first or random)");
}

struct SwitchNetwork {
  int sources = 2;
  double switch_loss_db = 1.0;     // per 2×1 stage
  double delay_loss_db = 0.0;
  double polariser_loss_db = 1.0;
  RoutingPolicy policy = RoutingPolicy::priority_last;

  int stages() const {
    int s = 0;
    while ((1 << s) < sources) ++s;
    return s;
  }

  /// Transmission seen by a routed signal photon; a single source still
  /// passes one switch stage.
  double path_transmission() const {
    const double total_db = std::max(stages(), 1) * switch_loss_db + delay_loss_db + polariser_loss_db;
    return units::transmission_from_db(total_db);
  }

  void validate() const {
    if (sources < 1 || (sources & (sources - 1)) != 0) throw ConfigError("source count must be a power of two");
    if (!(switch_loss_db >= 0.0) || !(delay_loss_db >= 0.0) || !(polariser_loss_db >= 0.0))
      throw ConfigError("losses must be >= 0 dB");
  }
};

struct RunOptions {
  std::uint64_t pulses = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct MuxRunRecord {
  std::uint64_t pulses = 0;
  double repetition_rate = 10e6;

  std::vector<std::uint64_t> herald;        // per source
  std::vector<std::uint64_t> herald_idler;  // source k heralded ∧ output click
  std::uint64_t herald_any = 0;
  std::uint64_t herald_multi = 0;  // ≥ 2 sources heralded (H1 ∧ H2 for two)
  std::uint64_t idler = 0;
  std::uint64_t herald_any_idler = 0;
  std::uint64_t herald_multi_idler = 0;  // N_{H1H2I} for two sources

  // 50:50 split output; "herald" means any source heralded.
  std::uint64_t idler_1 = 0;
  std::uint64_t idler_2 = 0;
  std::uint64_t idler_12 = 0;
  std::uint64_t herald_idler_1 = 0;
  std::uint64_t herald_idler_2 = 0;
  std::uint64_t herald_idler_12 = 0;

  std::uint64_t coincidences() const { return herald_any_idler; }

  void merge(const MuxRunRecord& o) {
    pulses += o.pulses;
    if (herald.size() < o.herald.size()) {
      herald.resize(o.herald.size(), 0);
      herald_idler.resize(o.herald.size(), 0);
    }
    for (std::size_t k = 0; k < o.herald.size(); ++k) {
      herald[k] += o.herald[k];
      herald_idler[k] += o.herald_idler[k];
    }
    herald_any += o.herald_any;
    herald_multi += o.herald_multi;
    idler += o.idler;
    herald_any_idler += o.herald_any_idler;
    herald_multi_idler += o.herald_multi_idler;
    idler_1 += o.idler_1;
    idler_2 += o.idler_2;
    idler_12 += o.idler_12;
    herald_idler_1 += o.herald_idler_1;
    herald_idler_2 += o.herald_idler_2;
    herald_idler_12 += o.herald_idler_12;
  }

  bool operator==(const MuxRunRecord&) const = default;

  CountSummary summary() const {
    CountSummary c;
    c.repetition_rate = repetition_rate;
    c.integration_time = static_cast<double>(pulses) / repetition_rate;
    auto d = [](std::uint64_t x) { return static_cast<double>(x); };
    c.herald = d(herald_any);
    c.idler = d(idler);
    c.coincidence = d(herald_any_idler);
    c.herald_1 = herald.size() > 0 ? d(herald[0]) : 0.0;
    c.herald_2 = herald.size() > 1 ? d(herald[1]) : 0.0;
    c.herald_1_idler = herald_idler.size() > 0 ? d(herald_idler[0]) : 0.0;
    c.herald_2_idler = herald_idler.size() > 1 ? d(herald_idler[1]) : 0.0;
    c.herald_12_idler = d(herald_multi_idler);
    c.herald_12 = d(herald_multi);
    c.idler_1 = d(idler_1);
    c.idler_2 = d(idler_2);
    c.idler_12 = d(idler_12);
    c.herald_idler_1 = d(herald_idler_1);
    c.herald_idler_2 = d(herald_idler_2);
    c.herald_idler_12 = d(herald_idler_12);
    return c;
  }
};

namespace detail {

struct SourceChannel {
  SourceModel model;
  ThermalSampler sampler;
  double signal_reach = 1.0;  // ηs × network path transmission
  std::uint32_t stream = 0;
};

struct SourceDraw {
  bool herald = false;
  int signal_photons = 0;   // photons reaching the output (direct detector)
  int first_half = 0;       // of those, photons sent to split detector 1
  bool background_direct = false;
  bool background_1 = false;
  bool background_2 = false;
};

// Draw order is fixed and independent of routing, so a source consumes the
// same numbers alone and inside a network.
inline SourceDraw draw_source(const SourceChannel& ch, std::uint64_t seed, std::uint64_t pulse) {
  CounterStream rng(seed, pulse, ch.stream);
  SourceDraw d;
  const int n = ch.sampler.sample(rng);
  const int herald_photons = rng.binomial(n, ch.model.herald_efficiency);
  const bool herald_bg = rng.bernoulli(ch.model.herald_background);
  d.herald = herald_photons > 0 || herald_bg;
  d.signal_photons = rng.binomial(n, ch.signal_reach);
  d.first_half = rng.binomial(d.signal_photons, 0.5);
  d.background_direct = rng.bernoulli(ch.model.signal_background);
  d.background_1 = rng.bernoulli(ch.model.signal_background);
  d.background_2 = rng.bernoulli(ch.model.signal_background);
  return d;
}

inline std::size_t route(RoutingPolicy policy, std::span<const SourceDraw> draws, std::uint64_t seed,
                         std::uint64_t pulse) {
  const std::size_t n = draws.size();
  std::size_t count = 0;
  for (const auto& d : draws) count += d.herald ? 1 : 0;
  if (count == 0) return 0;  // idle: switch rests on the first input
  switch (policy) {
    case RoutingPolicy::priority_last:
      for (std::size_t k = n; k-- > 0;)
        if (draws[k].herald) return k;
      break;
    case RoutingPolicy::priority_first:
      for (std::size_t k = 0; k < n; ++k)
        if (draws[k].herald) return k;
      break;
    case RoutingPolicy::random: {
      if (count == 1) break;
      CounterStream rng(seed, pulse, kSwitchStream);
      auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(count));
      for (std::size_t k = 0; k < n; ++k)
        if (draws[k].herald && pick-- == 0) return k;
      break;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    if (draws[k].herald) return k;
  return 0;
}

inline void accumulate_pulse(MuxRunRecord& rec, std::span<const SourceDraw> draws, std::size_t routed) {
  std::size_t heralds = 0;
  const SourceDraw& out = draws[routed];
  const bool direct = out.signal_photons > 0 || out.background_direct;
  const bool d1 = out.first_half > 0 || out.background_1;
  const bool d2 = (out.signal_photons - out.first_half) > 0 || out.background_2;
  for (std::size_t k = 0; k < draws.size(); ++k) {
    if (!draws[k].herald) continue;
    ++heralds;
    ++rec.herald[k];
    if (direct) ++rec.herald_idler[k];
  }
  const bool any = heralds > 0;
  ++rec.pulses;
  rec.idler += direct;
  rec.idler_1 += d1;
  rec.idler_2 += d2;
  rec.idler_12 += (d1 && d2);
  if (any) {
    ++rec.herald_any;
    rec.herald_any_idler += direct;
    rec.herald_idler_1 += d1;
    rec.herald_idler_2 += d2;
    rec.herald_idler_12 += (d1 && d2);
  }
  if (heralds >= 2) {
    ++rec.herald_multi;
    rec.herald_multi_idler += direct;
  }
}

inline MuxRunRecord simulate(const std::vector<SourceChannel>& channels, RoutingPolicy policy,
                             const RunOptions& opt) {
  constexpr std::uint64_t kBlock = 1u << 15;
  const std::uint64_t blocks = (opt.pulses + kBlock - 1) / kBlock;
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(blocks, 1)));

  MuxRunRecord total;
  total.repetition_rate = channels.front().model.repetition_rate;
  total.herald.assign(channels.size(), 0);
  total.herald_idler.assign(channels.size(), 0);
  std::mutex mu;
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    MuxRunRecord local;
    local.herald.assign(channels.size(), 0);
    local.herald_idler.assign(channels.size(), 0);
    std::vector<SourceDraw> draws(channels.size());
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t end = std::min(opt.pulses, (b + 1) * kBlock);
      for (std::uint64_t p = b * kBlock; p < end; ++p) {
        for (std::size_t k = 0; k < channels.size(); ++k) draws[k] = draw_source(channels[k], opt.seed, p);
        accumulate_pulse(local, draws, route(policy, draws, opt.seed, p));
      }
    }
    std::lock_guard lock(mu);
    total.merge(local);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return total;
}

}  // namespace detail

/// One source routed through the switch path (one stage, delay, polariser).
/// `stream` selects the random stream; use the source's network index to
/// share random numbers with a multiplexed run.
inline MuxRunRecord run_single_source(const SourceModel& source, const SwitchNetwork& network,
                                      const RunOptions& opt, std::uint32_t stream = 0) {
  source.validate();
  network.validate();
  if (opt.pulses < 1) throw DomainError("need at least one pulse");
  std::vector<detail::SourceChannel> ch{{source, ThermalSampler(source.weights, source.mean_pairs),
                                         source.signal_transmission * network.path_transmission(), stream}};
  return detail::simulate(ch, network.policy, opt);
}

inline MuxRunRecord run_multiplexed(const std::vector<SourceModel>& sources, const SwitchNetwork& network,
                                    const RunOptions& opt) {
  network.validate();
  if (sources.size() < 2) throw ConfigError("multiplexing needs at least two sources");
  if (static_cast<int>(sources.size()) != network.sources)
    throw ConfigError("source count " + std::to_string(sources.size()) + " does not match network capacity " +
                      std::to_string(network.sources));
  if (opt.pulses < 1) throw DomainError("need at least one pulse");
  const double rp = sources.front().repetition_rate;
  std::vector<detail::SourceChannel> ch;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    sources[k].validate();
    if (sources[k].repetition_rate != rp) throw ConfigError("all sources must share one repetition rate");
    ch.push_back({sources[k], ThermalSampler(sources[k].weights, sources[k].mean_pairs),
                  sources[k].signal_transmission * network.path_transmission(), static_cast<std::uint32_t>(k)});
  }
  return detail::simulate(ch, network.policy, opt);
}

/// Ratio of output coincidence rates, multiplexed over single source.
inline double enhancement_factor(const MuxRunRecord& mux, const MuxRunRecord& single) {
  if (mux.pulses != single.pulses) throw DomainError("enhancement factor needs equal pulse counts");
  if (single.coincidences() == 0) throw EstimatorError("enhancement factor undefined: single-source rate is zero");
  return static_cast<double>(mux.coincidences()) / static_cast<double>(single.coincidences());
}

/// Ratio against the mean of several individually measured sources.
inline double enhancement_factor(const MuxRunRecord& mux, std::span<const MuxRunRecord> singles) {
  if (singles.empty()) throw DomainError("enhancement factor needs at least one single-source record");
  double sum = 0.0;
  for (const auto& s : singles) {
    if (s.pulses != mux.pulses) throw DomainError("enhancement factor needs equal pulse counts");
    sum += static_cast<double>(s.coincidences());
  }
  if (sum == 0.0) throw EstimatorError("enhancement factor undefined: single-source rate is zero");
  return static_cast<double>(mux.coincidences()) / (sum / static_cast<double>(singles.size()));
}

/// Expected counts for `pulses` pulses, computed from the exact per-source
/// click distributions and the routing rule (no sampling).
inline CountSummary expected_counts(const std::vector<SourceModel>& sources, const SwitchNetwork& network,
                                    double pulses, int cutoff = 12) {
  network.validate();
  if (sources.empty()) throw DomainError("need at least one source");
  const std::size_t n = sources.size();
  if (n > 16) throw DomainError("exact composition limited to 16 sources");
  std::vector<ClickDistribution> dist;
  for (const auto& s : sources) dist.push_back(exact_click_distribution(s, cutoff, network.path_transmission()));
  std::vector<double> ph(n);
  for (std::size_t k = 0; k < n; ++k) ph[k] = dist[k].herald_probability();

  CountSummary c;
  c.repetition_rate = sources.front().repetition_rate;
  c.integration_time = pulses / c.repetition_rate;
  double p_h1 = 0, p_h2 = 0, p_h12 = 0, p_any = 0, p_i = 0, p_c = 0, p_h1i = 0, p_h2i = 0, p_multi_i = 0;
  double p_i1 = 0, p_i2 = 0, p_i12 = 0, p_hi1 = 0, p_hi2 = 0, p_hi12 = 0;

  for (std::uint32_t pattern = 0; pattern < (1u << n); ++pattern) {
    std::vector<std::size_t> heralding;
    for (std::size_t k = 0; k < n; ++k)
      if (pattern >> k & 1u) heralding.push_back(k);
    std::vector<std::size_t> candidates;
    if (heralding.empty()) {
      candidates = {0};
    } else if (network.policy == RoutingPolicy::priority_last) {
      candidates = {heralding.back()};
    } else if (network.policy == RoutingPolicy::priority_first) {
      candidates = {heralding.front()};
    } else {
      candidates = heralding;
    }
    const double share = 1.0 / static_cast<double>(candidates.size());
    for (std::size_t r : candidates) {
      double others = share;
      for (std::size_t k = 0; k < n; ++k)
        if (k != r) others *= (pattern >> k & 1u) ? ph[k] : 1.0 - ph[k];
      const int hr = static_cast<int>(pattern >> r & 1u);
      const double direct = others * dist[r].direct[hr][1];
      const double all = others * (dist[r].direct[hr][0] + dist[r].direct[hr][1]);
      const double s1 = others * (dist[r].split[hr][1][0] + dist[r].split[hr][1][1]);
      const double s2 = others * (dist[r].split[hr][0][1] + dist[r].split[hr][1][1]);
      const double s12 = others * dist[r].split[hr][1][1];
      const bool h1 = pattern & 1u;
      const bool h2 = n > 1 && (pattern >> 1 & 1u);
      const bool any = !heralding.empty();
      const bool multi = heralding.size() >= 2;
      p_i += direct;
      p_i1 += s1;
      p_i2 += s2;
      p_i12 += s12;
      if (h1) p_h1 += all, p_h1i += direct;
      if (h2) p_h2 += all, p_h2i += direct;
      if (h1 && h2) p_h12 += all;
      if (any) p_any += all, p_c += direct, p_hi1 += s1, p_hi2 += s2, p_hi12 += s12;
      if (multi) p_multi_i += direct;
    }
  }
  c.herald = pulses * p_any;
  c.idler = pulses * p_i;
  c.coincidence = pulses * p_c;
  c.herald_1 = pulses * p_h1;
  c.herald_2 = pulses * p_h2;
  c.herald_1_idler = pulses * p_h1i;
  c.herald_2_idler = pulses * p_h2i;
  c.herald_12_idler = pulses * p_multi_i;
  c.herald_12 = pulses * p_h12;
  c.idler_1 = pulses * p_i1;
  c.idler_2 = pulses * p_i2;
  c.idler_12 = pulses * p_i12;
  c.herald_idler_1 = pulses * p_hi1;
  c.herald_idler_2 = pulses * p_hi2;
  c.herald_idler_12 = pulses * p_hi12;
  return c;
}

/// Single source through the switch path, expected counts.
inline CountSummary expected_counts(const SourceModel& source, const SwitchNetwork& network, double pulses,
                                    int cutoff = 12) {
  SwitchNetwork single = network;
  single.sources = 1;
  return expected_counts(std::vector<SourceModel>{source}, single, pulses, cutoff);
}

/// One row of the per-pulse debugging log.
struct PulseLogRow {
  std::uint64_t pulse = 0;
  int pairs = 0;
  int herald_photons = 0;
  int signal_photons = 0;
  bool herald_click = false;
  bool signal_click = false;
};

inline constexpr std::uint64_t kMaxPulseLogRows = 100'000;

/// First `rows` pulses of a source with per-mode sampling, for inspection.
inline std::vector<PulseLogRow> pulse_log(const SourceModel& source, std::uint64_t seed, std::uint64_t rows) {
  source.validate();
  rows = std::min(rows, kMaxPulseLogRows);
  std::vector<PulseLogRow> out;
  out.reserve(rows);
  for (std::uint64_t p = 0; p < rows; ++p) {
    CounterStream rng(seed, p, kDiagnosticStream);
    const auto o = detect_pulse(source, thermal_pair_sample(source, rng), rng);
    out.push_back({p, o.total_pairs(), o.herald_photons, o.signal_photons, o.herald_click, o.signal_click});
  }
  return out;
}

}  // namespace photonmux
