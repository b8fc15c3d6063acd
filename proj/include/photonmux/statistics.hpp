#pragma once

// Per-pulse photon statistics of one heralded source: independent thermal
// pair numbers per Schmidt mode, binomial channel loss, Bernoulli background
// clicks and binary (non-number-resolving) gated detectors.

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "photonmux/error.hpp"
#include "photonmux/rng.hpp"

namespace photonmux {

struct SourceModel {
  std::vector<double> weights{1.0};  // Schmidt weights λⱼ, Σ = 1
  double mean_pairs = 0.0;           // μ, mean total pairs per pulse
  double herald_efficiency = 1.0;    // ηh, lumped channel × detector
  double signal_transmission = 1.0;  // ηs
  double herald_background = 0.0;   // click probability per pulse
  double signal_background = 0.0;   // click probability per pulse per detector
  double repetition_rate = 10e6;     // Hz

  void validate() const {
    if (weights.empty()) throw DomainError("source model needs at least one Schmidt weight");
    double s = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw DomainError("Schmidt weights must be non-negative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DomainError("Schmidt weights must sum to 1");
    if (!(mean_pairs >= 0.0) || !std::isfinite(mean_pairs)) throw DomainError("mean pair number must be >= 0");
    auto unit = [](double x, const char* what) {
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
    };
    unit(herald_efficiency, "herald efficiency");
    unit(signal_transmission, "signal transmission");
    auto prob = [](double x, const char* what) {
      if (!(x >= 0.0 && x < 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1)");
    };
    prob(herald_background, "herald background");
    prob(signal_background, "signal background");
    if (!(repetition_rate > 0.0)) throw DomainError("repetition rate must be positive");
  }

  double mode_mean(std::size_t j) const { return weights[j] * mean_pairs; }
};

struct PulseOutcome {
  std::vector<int> pairs_per_mode;
  int herald_photons = 0;
  int signal_photons = 0;
  bool herald_click = false;
  bool signal_click = false;

  int total_pairs() const { return std::accumulate(pairs_per_mode.begin(), pairs_per_mode.end(), 0); }
};

/// Probability of exactly one pair from a single thermal mode, μ/(1+μ)².
inline double single_pair_probability(double mean_pairs) {
  if (!(mean_pairs >= 0.0)) throw DomainError("mean pair number must be >= 0");
  return mean_pairs / ((1.0 + mean_pairs) * (1.0 + mean_pairs));
}

/// Smaller root μ of μ/(1+μ)² = p₁ for p₁ ∈ [0, 0.25].
inline double mean_pairs_for_single_pair_probability(double p1) {
  if (!(p1 >= 0.0 && p1 <= 0.25)) throw DomainError("single-pair probability must lie in [0, 0.25]");
  if (p1 == 0.0) return 0.0;
  return 2.0 * p1 / (1.0 - 2.0 * p1 + std::sqrt(1.0 - 4.0 * p1));
}

inline double delivery_probability(double herald_efficiency, double signal_transmission, double p1) {
  return herald_efficiency * signal_transmission * p1;
}

/// Probability that N independent sources all deliver in the same pulse.
inline double n_source_delivery(int n_sources, double herald_efficiency, double signal_transmission, double p1) {
  if (n_sources < 0) throw DomainError("source count must be >= 0");
  return std::pow(delivery_probability(herald_efficiency, signal_transmission, p1), n_sources);
}

/// Draws the total pair number of a multimode thermal source without
/// visiting every mode on the (common) empty pulses. Distributionally equal
/// to summing independent per-mode geometric draws.
class ThermalSampler {
 public:
  ThermalSampler() = default;
  ThermalSampler(const std::vector<double>& weights, double mean_pairs) {
    const std::size_t m = weights.size();
    ratio_.resize(m);
    nonzero_from_.resize(m + 1);
    double log_zero = 0.0;  // log P(all modes k >= j empty)
    nonzero_from_[m] = 0.0;
    for (std::size_t j = m; j-- > 0;) {
      const double mu = weights[j] * mean_pairs;
      ratio_[j] = mu / (1.0 + mu);
      log_zero -= std::log1p(mu);
      nonzero_from_[j] = -std::expm1(log_zero);
    }
  }

  int sample(CounterStream& rng) const {
    const std::size_t m = ratio_.size();
    int total = 0;
    std::size_t j = 0;
    while (j < m) {
      if (rng.uniform() >= nonzero_from_[j]) break;  // modes j.. all empty
      // At least one of j.. is occupied; find the first.
      while (j + 1 < m && !(rng.uniform() * nonzero_from_[j] < ratio_[j])) ++j;
      total += 1 + rng.geometric(ratio_[j]);
      ++j;
    }
    return total;
  }

  double empty_probability() const { return nonzero_from_.empty() ? 1.0 : 1.0 - nonzero_from_[0]; }

 private:
  std::vector<double> ratio_;         // qⱼ = μⱼ/(1+μⱼ) = P(nⱼ ≥ 1)
  std::vector<double> nonzero_from_;  // P(some mode k >= j occupied)
};

/// Per-mode pair numbers, each drawn from the thermal law with mean λⱼμ.
inline PulseOutcome thermal_pair_sample(const SourceModel& model, CounterStream& rng) {
  PulseOutcome out;
  out.pairs_per_mode.resize(model.weights.size());
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    const double mu = model.mode_mean(j);
    out.pairs_per_mode[j] = rng.geometric(mu / (1.0 + mu));
  }
  return out;
}

/// Loss thinning and binary detection of a sampled pulse.
inline PulseOutcome detect_pulse(const SourceModel& model, PulseOutcome outcome, CounterStream& rng) {
  const int n = outcome.total_pairs();
  outcome.herald_photons = rng.binomial(n, model.herald_efficiency);
  outcome.signal_photons = rng.binomial(n, model.signal_transmission);
  const bool herald_bg = rng.bernoulli(model.herald_background);
  const bool signal_bg = rng.bernoulli(model.signal_background);
  outcome.herald_click = outcome.herald_photons > 0 || herald_bg;
  outcome.signal_click = outcome.signal_photons > 0 || signal_bg;
  return outcome;
}

// ---------------------------------------------------------------------------
// Exact click statistics by truncated Fock-space enumeration.

/// Joint click probabilities for one source. `direct` is indexed
/// [herald][signal] for a single signal detector; `split` is indexed
/// [herald][detector 1][detector 2] for a 50:50 split of the signal channel.
struct ClickDistribution {
  std::vector<double> pair_pmf;  // P(total pairs = n), n = 0..cutoff
  double truncated_mass = 0.0;   // probability lost to the cutoff
  std::array<std::array<double, 2>, 2> direct{};
  std::array<std::array<std::array<double, 2>, 2>, 2> split{};

  double herald_probability() const { return direct[1][0] + direct[1][1]; }
  double signal_probability() const { return direct[0][1] + direct[1][1]; }
  double coincidence_probability() const { return direct[1][1]; }
};

/// Total-pair pmf for independent thermal modes, each truncated at `cutoff`
/// and the convolution capped at `cutoff` pairs.
inline std::vector<double> thermal_pair_pmf(const std::vector<double>& weights, double mean_pairs, int cutoff) {
  if (cutoff < 1) throw DomainError("photon-number cutoff must be >= 1");
  std::vector<double> total(static_cast<std::size_t>(cutoff) + 1, 0.0);
  total[0] = 1.0;
  std::vector<double> mode(total.size());
  std::vector<double> next(total.size());
  for (double w : weights) {
    const double mu = w * mean_pairs;
    if (mu == 0.0) continue;
    const double q = mu / (1.0 + mu);
    double pn = 1.0 / (1.0 + mu);
    for (auto& x : mode) {
      x = pn;
      pn *= q;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < total.size(); ++a)
      for (std::size_t b = 0; a + b < total.size(); ++b) next[a + b] += total[a] * mode[b];
    total.swap(next);
  }
  return total;
}

/// Exact (up to truncation) joint click probabilities. `path_transmission`
/// multiplies the signal transmission, e.g. for a switch network.
inline ClickDistribution exact_click_distribution(const SourceModel& model, int cutoff,
                                                  double path_transmission = 1.0) {
  model.validate();
  ClickDistribution d;
  d.pair_pmf = thermal_pair_pmf(model.weights, model.mean_pairs, cutoff);
  d.truncated_mass = 1.0 - std::accumulate(d.pair_pmf.begin(), d.pair_pmf.end(), 0.0);

  const double eh = model.herald_efficiency;
  const double es = model.signal_transmission * path_transmission;
  const double bh = model.herald_background;
  const double bs = model.signal_background;

  // P(every detector in the set is silent); photon reach probabilities add
  // because each signal photon ends in at most one detector.
  auto silent = [&](bool herald, double signal_reach, int signal_detectors) {
    double s = 0.0;
    for (std::size_t n = 0; n < d.pair_pmf.size(); ++n) {
      const double nn = static_cast<double>(n);
      double term = d.pair_pmf[n] * std::pow(1.0 - signal_reach, nn);
      if (herald) term *= std::pow(1.0 - eh, nn);
      s += term;
    }
    if (herald) s *= (1.0 - bh);
    return s * std::pow(1.0 - bs, signal_detectors);
  };

  // Inclusion-exclusion over the detectors that click.
  for (int h = 0; h < 2; ++h)
    for (int c = 0; c < 2; ++c) {
      double p = 0.0;
      for (int th = 0; th <= h; ++th)
        for (int tc = 0; tc <= c; ++tc) {
          const bool hs = (h == 0) || th;
          const bool cs = (c == 0) || tc;
          const double sign = ((th + tc) % 2 == 0) ? 1.0 : -1.0;
          p += sign * silent(hs, cs ? es : 0.0, cs ? 1 : 0);
        }
      d.direct[h][c] = p;
    }
  for (int h = 0; h < 2; ++h)
    for (int c1 = 0; c1 < 2; ++c1)
      for (int c2 = 0; c2 < 2; ++c2) {
        double p = 0.0;
        for (int th = 0; th <= h; ++th)
          for (int t1 = 0; t1 <= c1; ++t1)
            for (int t2 = 0; t2 <= c2; ++t2) {
              const bool hs = (h == 0) || th;
              const bool s1 = (c1 == 0) || t1;
              const bool s2 = (c2 == 0) || t2;
              const double sign = ((th + t1 + t2) % 2 == 0) ? 1.0 : -1.0;
              const double reach = 0.5 * es * ((s1 ? 1.0 : 0.0) + (s2 ? 1.0 : 0.0));
              p += sign * silent(hs, reach, (s1 ? 1 : 0) + (s2 ? 1 : 0));
            }
        d.split[h][c1][c2] = p;
      }
  return d;
}

}  // namespace photonmux
