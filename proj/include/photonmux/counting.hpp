#pragma once

// Coincidence-counting figures of merit computed from raw (not
// background-subtracted) count rates.
//
// Error bars are first-order propagation with Poisson counts. Counts that
// share events are correlated: for nested event sets A ⊇ B the covariance of
// the two counts is N_B, and in general Cov(N_A, N_B) = N_{A∧B}. A zero count
// contributes a one-count variance floor.

#include <array>
#include <cmath>
#include <optional>

#include "photonmux/error.hpp"

namespace photonmux {

/// Raw counts accumulated over `integration_time` at a pulse rate of
/// `repetition_rate`. Rates are counts / integration_time.
struct CountSummary {
  double repetition_rate = 10e6;  // Hz
  double integration_time = 1.0;  // s

  double herald = 0.0;       // N_H: pulses with a herald click (any source)
  double idler = 0.0;        // N_I: output detector clicks
  double coincidence = 0.0;  // N_c: herald ∧ output

  // Two-source bookkeeping.
  double herald_1 = 0.0;
  double herald_2 = 0.0;
  double herald_1_idler = 0.0;
  double herald_2_idler = 0.0;
  double herald_12_idler = 0.0;     // triple H1 ∧ H2 ∧ I
  std::optional<double> herald_12;  // H1 ∧ H2; only used for error bars

  // 50:50 split output.
  double idler_1 = 0.0;
  double idler_2 = 0.0;
  double idler_12 = 0.0;
  double herald_idler_1 = 0.0;
  double herald_idler_2 = 0.0;
  double herald_idler_12 = 0.0;

  double pulses() const { return repetition_rate * integration_time; }
  double rate(double count) const { return count / integration_time; }

  void validate() const {
    if (!(integration_time > 0.0)) throw DomainError("integration time must be positive");
    if (!(repetition_rate > 0.0)) throw DomainError("repetition rate must be positive");
    const double n = pulses();
    for (double c : {herald, idler, coincidence, herald_1, herald_2, herald_1_idler, herald_2_idler, herald_12_idler,
                     idler_1, idler_2, idler_12, herald_idler_1, herald_idler_2, herald_idler_12}) {
      if (!(c >= 0.0)) throw DomainError("counts must be non-negative");
      if (c > n * (1.0 + 1e-12)) throw DomainError("a count rate exceeds the repetition rate");
    }
  }
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

template <std::size_t N>
double propagate(const std::array<double, N>& gradient, const std::array<std::array<double, N>, N>& shared) {
  double var = 0.0;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      double cov = shared[a][b];
      if (a == b && cov <= 0.0) cov = 1.0;
      var += gradient[a] * gradient[b] * cov;
    }
  return std::sqrt(std::max(var, 0.0));
}

}  // namespace detail

/// CAR = R_p N_c / (N_H N_I).
inline Estimate car_single(const CountSummary& c) {
  c.validate();
  if (!(c.herald > 0.0) || !(c.idler > 0.0)) throw EstimatorError("CAR undefined: a singles rate is zero");
  Estimate e;
  e.value = c.repetition_rate * c.rate(c.coincidence) / (c.rate(c.herald) * c.rate(c.idler));
  const double n = c.pulses();
  const double C = c.coincidence, H = c.herald, I = c.idler;
  const std::array<double, 3> g{n / (H * I), -e.value / H, -e.value / I};
  const std::array<std::array<double, 3>, 3> s{{{C, C, C}, {C, H, C}, {C, C, I}}};
  e.error = detail::propagate(g, s);
  return e;
}

/// Two-source CAR with the double-counting correction:
///   N_c = N_{H1I} + N_{H2I} − N_{H1H2I}
///   A_c = N_{H1}N_I/R_p + N_{H2}N_I/R_p − N_{H1}N_{H2}N_I/R_p²
inline Estimate car_multiplexed(const CountSummary& c) {
  c.validate();
  const double rp = c.repetition_rate;
  const double h1 = c.rate(c.herald_1), h2 = c.rate(c.herald_2), ni = c.rate(c.idler);
  const double nc = c.rate(c.herald_1_idler) + c.rate(c.herald_2_idler) - c.rate(c.herald_12_idler);
  const double ac = h1 * ni / rp + h2 * ni / rp - h1 * h2 * ni / (rp * rp);
  if (!(ac > 0.0)) throw EstimatorError("multiplexed CAR undefined: accidental rate is zero");
  Estimate e;
  e.value = nc / ac;

  // Same expression in counts: A = (H1 I + H2 I)/n − H1 H2 I/n².
  const double n = c.pulses();
  const double a = c.herald_1_idler, b = c.herald_2_idler, t = c.herald_12_idler;
  const double H1 = c.herald_1, H2 = c.herald_2, I = c.idler;
  const double A = (H1 * I + H2 * I) / n - H1 * H2 * I / (n * n);
  const double H12 = c.herald_12.value_or(H1 * H2 / n);
  const std::array<double, 6> g{1.0 / A,
                                1.0 / A,
                                -1.0 / A,
                                -e.value / A * (I / n - H2 * I / (n * n)),
                                -e.value / A * (I / n - H1 * I / (n * n)),
                                -e.value / I};
  // Order: H1I, H2I, H1H2I, H1, H2, I.
  const std::array<std::array<double, 6>, 6> s{{
      {a, t, t, a, t, a},
      {t, b, t, t, b, b},
      {t, t, t, t, t, t},
      {a, t, t, H1, H12, a},
      {t, b, t, H12, H2, b},
      {a, b, t, a, b, I},
  }};
  e.error = detail::propagate(g, s);
  return e;
}

/// Marginal g⁽²⁾(0) = N_{I1I2} R_p / (N_{I1} N_{I2}).
inline Estimate g2_marginal(const CountSummary& c) {
  c.validate();
  if (!(c.idler_1 > 0.0) || !(c.idler_2 > 0.0)) throw EstimatorError("marginal g2 undefined: a split singles rate is zero");
  Estimate e;
  e.value = c.rate(c.idler_12) * c.repetition_rate / (c.rate(c.idler_1) * c.rate(c.idler_2));
  const double n = c.pulses();
  const double D = c.idler_12, A = c.idler_1, B = c.idler_2;
  const std::array<double, 3> g{n / (A * B), -e.value / A, -e.value / B};
  const std::array<std::array<double, 3>, 3> s{{{D, D, D}, {D, A, D}, {D, D, B}}};
  e.error = detail::propagate(g, s);
  return e;
}

/// Heralded g⁽²⁾(0) = N_H N_{HI1I2} / (N_{HI1} N_{HI2}), i.e. the split
/// coincidence statistics conditioned on a herald click.
inline Estimate g2_heralded(const CountSummary& c) {
  c.validate();
  if (!(c.herald > 0.0) || !(c.herald_idler_1 > 0.0) || !(c.herald_idler_2 > 0.0))
    throw EstimatorError("heralded g2 undefined: a heralded split rate is zero");
  Estimate e;
  e.value = c.rate(c.herald) * c.rate(c.herald_idler_12) / (c.rate(c.herald_idler_1) * c.rate(c.herald_idler_2));
  const double H = c.herald, T = c.herald_idler_12, A = c.herald_idler_1, B = c.herald_idler_2;
  const std::array<double, 4> g{T / (A * B), H / (A * B), -e.value / A, -e.value / B};
  // Order: H, HI1I2, HI1, HI2.
  const std::array<std::array<double, 4>, 4> s{{{H, T, A, B}, {T, T, T, T}, {A, T, A, T}, {B, T, T, B}}};
  e.error = detail::propagate(g, s);
  return e;
}

}  // namespace photonmux
