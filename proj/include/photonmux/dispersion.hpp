#pragma once

// Parametric fibre dispersion about a reference frequency, truncated at fourth
// order, and the degenerate-pump four-wave-mixing phase mismatch it implies.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "photonmux/error.hpp"
#include "photonmux/units.hpp"

namespace photonmux {

/// Closed angular-frequency interval in which the Taylor model is trusted.
struct ValidityWindow {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double omega) const { return omega >= lo && omega <= hi; }
};

struct DispersionModel {
  double omega0 = 0.0;        // expansion point, rad/s
  double beta2 = 0.0;         // s^2/m
  double beta3 = 0.0;         // s^3/m
  double beta4 = 0.0;         // s^4/m
  double gamma = 0.0;         // 1/(W m)
  double length = 1.0;        // m
  double pump_power = 0.0;    // peak, W
  double window_fraction = 0.4;

  ValidityWindow window() const { return {omega0 * (1.0 - window_fraction), omega0 * (1.0 + window_fraction)}; }

  /// Constant nonlinear phase term 2γP (1/m).
  double nonlinear_phase() const { return 2.0 * gamma * pump_power; }

  void validate() const {
    if (!(omega0 > 0.0)) throw DomainError("dispersion model: reference frequency must be positive");
    if (!(length > 0.0)) throw DomainError("dispersion model: fibre length must be positive");
    if (!(gamma >= 0.0)) throw DomainError("dispersion model: nonlinear coefficient must be non-negative");
    if (!(pump_power >= 0.0)) throw DomainError("dispersion model: pump power must be non-negative");
    if (!(window_fraction > 0.0 && window_fraction < 1.0))
      throw DomainError("dispersion model: window fraction must lie in (0, 1)");
  }
};

namespace detail {

inline void require_in_window(const DispersionModel& model, double omega, const char* what) {
  const auto w = model.window();
  if (!w.contains(omega)) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << " " << omega << " rad/s (" << units::to_nm(units::wavelength(omega))
        << " nm) lies outside the dispersion validity window [" << w.lo << ", " << w.hi << "] rad/s ("
        << units::to_nm(units::wavelength(w.hi)) << "-" << units::to_nm(units::wavelength(w.lo)) << " nm)";
    throw DomainError(msg.str());
  }
}

// Taylor polynomial pieces with β0 = β1 = 0; both drop out of every
// energy-conserving phase mismatch.
inline double beta_rel(const DispersionModel& m, double omega) {
  const double x = omega - m.omega0;
  return x * x * (m.beta2 / 2.0 + x * (m.beta3 / 6.0 + x * m.beta4 / 24.0));
}

inline double beta1_rel(const DispersionModel& m, double omega) {
  const double x = omega - m.omega0;
  return x * (m.beta2 + x * (m.beta3 / 2.0 + x * m.beta4 / 6.0));
}

inline double beta2_unchecked(const DispersionModel& m, double omega) {
  const double x = omega - m.omega0;
  return m.beta2 + x * (m.beta3 + 0.5 * m.beta4 * x);
}

// Real roots of a x^2 + b x + c = 0, ascending. Degenerates to the linear
// case when a == 0; no roots when everything vanishes.
inline std::vector<double> real_quadratic_roots(double a, double b, double c) {
  std::vector<double> roots;
  if (a == 0.0) {
    if (b != 0.0) roots.push_back(-c / b);
    return roots;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return roots;
  if (disc == 0.0) {
    roots.push_back(-b / (2.0 * a));
    return roots;
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = (q != 0.0) ? c / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  roots.push_back(r1);
  roots.push_back(r2);
  return roots;
}

}  // namespace detail

/// Group-velocity dispersion β₂(ω) from the Taylor expansion.
inline double beta2(const DispersionModel& model, double omega) {
  detail::require_in_window(model, omega, "frequency");
  return detail::beta2_unchecked(model, omega);
}

/// Inverse group velocity relative to its value at ω₀ (s/m).
inline double relative_beta1(const DispersionModel& model, double omega) {
  detail::require_in_window(model, omega, "frequency");
  return detail::beta1_rel(model, omega);
}

/// Vacuum wavelengths (m, ascending) where β₂ changes sign inside the window.
inline std::vector<double> zero_dispersion_wavelengths(const DispersionModel& model) {
  const auto w = model.window();
  std::vector<double> out;
  for (double x : detail::real_quadratic_roots(0.5 * model.beta4, model.beta3, model.beta2)) {
    const double omega = model.omega0 + x;
    if (w.contains(omega)) out.push_back(units::wavelength(omega));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Phase mismatch Δk (1/m) for sidebands at ω̄ ± Ω from two degenerate pump
/// photons at ω̄. Even in Ω; the expansion is re-centred at ω̄.
inline double phase_mismatch(const DispersionModel& model, double detuning, double pump_omega) {
  detail::require_in_window(model, pump_omega, "pump frequency");
  detail::require_in_window(model, pump_omega + std::abs(detuning), "sideband frequency");
  detail::require_in_window(model, pump_omega - std::abs(detuning), "sideband frequency");
  const double o2 = detuning * detuning;
  const double b2p = detail::beta2_unchecked(model, pump_omega);
  return -(b2p * o2 + model.beta4 * o2 * o2 / 12.0) - model.nonlinear_phase();
}

/// Δk at an arbitrary signal/idler pair. The pump photons are taken at the
/// energy-conserving mean (ωs + ωi)/2, which makes the result exactly
/// 2β(ω̄) − β(ωs) − β(ωi) − 2γP for the quartic model.
inline double phase_mismatch_pair(const DispersionModel& model, double omega_s, double omega_i) {
  detail::require_in_window(model, omega_s, "signal frequency");
  detail::require_in_window(model, omega_i, "idler frequency");
  const double mean = 0.5 * (omega_s + omega_i);
  const double half = 0.5 * (omega_s - omega_i);
  const double o2 = half * half;
  const double b2p = detail::beta2_unchecked(model, mean);
  return -(b2p * o2 + model.beta4 * o2 * o2 / 12.0) - model.nonlinear_phase();
}

/// Squared detunings Ω² > 0 with Δk(Ω) = 0 for a pump at `pump_omega`,
/// ascending. Window checks are left to the caller.
inline std::vector<double> phasematched_detunings_squared(const DispersionModel& model, double pump_omega) {
  const double b2p = detail::beta2_unchecked(model, pump_omega);
  std::vector<double> out;
  for (double y : detail::real_quadratic_roots(model.beta4 / 12.0, b2p, model.nonlinear_phase()))
    if (y > 0.0) out.push_back(y);
  return out;
}

/// Outermost phasematched sideband detuning Ω (rad/s) for a pump frequency.
inline double outer_sideband_detuning(const DispersionModel& model, double pump_omega) {
  detail::require_in_window(model, pump_omega, "pump frequency");
  const auto ys = phasematched_detunings_squared(model, pump_omega);
  if (ys.empty()) throw DomainError("no phasematched sidebands for this pump frequency");
  return std::sqrt(ys.back());
}

/// The same quartic β(ω) expanded about another reference frequency. Exact:
/// only the expansion point and the window move.
inline DispersionModel recentred(const DispersionModel& model, double omega0) {
  DispersionModel m = model;
  const double d = omega0 - model.omega0;
  m.omega0 = omega0;
  m.beta2 = model.beta2 + d * (model.beta3 + 0.5 * d * model.beta4);
  m.beta3 = model.beta3 + d * model.beta4;
  m.validate();
  return m;
}

/// Builds a two-ZDW model whose outer sidebands phasematch at
/// (pump ± Ω) and whose signal (the high-frequency sideband) travels at
/// the pump group velocity. The expansion point is the pump itself.
inline DispersionModel fit_group_velocity_matched_model(double pump_omega, double signal_omega,
                                                        double beta2_at_pump, double gamma,
                                                        double pump_power, double length,
                                                        double window_fraction = 0.4) {
  DispersionModel m;
  m.omega0 = pump_omega;
  m.beta2 = beta2_at_pump;
  m.gamma = gamma;
  m.pump_power = pump_power;
  m.length = length;
  m.window_fraction = window_fraction;
  const double detuning = signal_omega - pump_omega;
  const double d2 = detuning * detuning;
  const double nl = m.nonlinear_phase();
  // β₂Ω² + β₄Ω⁴/12 + 2γP = 0
  m.beta4 = -12.0 * (beta2_at_pump * d2 + nl) / (d2 * d2);
  // ∫ β₂ from pump to signal = 0  ⇔  β₂ + β₃Ω/2 + β₄Ω²/6 = 0
  m.beta3 = -2.0 * (beta2_at_pump + m.beta4 * d2 / 6.0) / detuning;
  m.validate();
  return m;
}

}  // namespace photonmux
