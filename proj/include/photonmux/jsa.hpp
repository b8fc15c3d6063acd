#pragma once

// Joint spectral amplitude f(ωs, ωi) = α(ωs + ωi) φ(ωs, ωi) on a uniform
// signal × idler grid, plus phasematching-contour tracing.

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "photonmux/dispersion.hpp"
#include "photonmux/error.hpp"
#include "photonmux/units.hpp"

namespace photonmux {

using cplx = std::complex<double>;

struct Axis {
  double center = 0.0;  // rad/s
  double span = 0.0;    // full width, rad/s
  int count = 0;

  double step() const { return span / static_cast<double>(count - 1); }
  double at(int k) const { return (center - 0.5 * span) + step() * static_cast<double>(k); }
  double front() const { return at(0); }
  double back() const { return at(count - 1); }

  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) v[static_cast<std::size_t>(k)] = at(k);
    return v;
  }

  void validate(const char* name) const {
    if (count < 2) throw DomainError(std::string(name) + " axis needs at least 2 points");
    if (!(span > 0.0)) throw DomainError(std::string(name) + " axis span must be positive");
    if (!(center - 0.5 * span > 0.0)) throw DomainError(std::string(name) + " axis must stay at positive frequency");
  }

  bool operator==(const Axis&) const = default;
};

struct FrequencyGrid {
  Axis signal;
  Axis idler;

  double cell_area() const { return signal.step() * idler.step(); }
  void validate() const {
    signal.validate("signal");
    idler.validate("idler");
  }
  FrequencyGrid transposed() const { return {idler, signal}; }

  bool operator==(const FrequencyGrid&) const = default;
};

enum class PumpShape { gaussian };

struct PumpEnvelope {
  double omega = 0.0;  // central angular frequency, rad/s
  double sigma = 0.0;  // RMS spectral bandwidth of the pump field, rad/s
  PumpShape shape = PumpShape::gaussian;

  /// Bandwidth of the two-pump-photon sum frequency for a degenerate pump.
  double two_photon_sigma() const { return std::sqrt(2.0) * sigma; }

  void validate() const {
    if (!(omega > 0.0)) throw DomainError("pump frequency must be positive");
    if (!(sigma > 0.0)) throw DomainError("pump bandwidth must be positive");
  }
};

/// Intensity |f|² on a grid. Normalised means Σ I · cellArea = 1.
struct JointSpectralIntensity {
  FrequencyGrid grid;
  Eigen::MatrixXd intensity;

  double mass() const { return intensity.sum() * grid.cell_area(); }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0) || !std::isfinite(m)) throw DegenerateInputError("joint spectral intensity has no mass");
    intensity /= m;
  }

  Eigen::MatrixXd magnitude() const { return intensity.cwiseMax(0.0).cwiseSqrt(); }

  JointSpectralIntensity transposed() const { return {grid.transposed(), intensity.transpose()}; }
};

struct JointSpectralAmplitude {
  FrequencyGrid grid;
  Eigen::MatrixXcd amplitude;  // rows: signal, columns: idler

  double mass() const { return amplitude.squaredNorm() * grid.cell_area(); }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0) || !std::isfinite(m)) throw DegenerateInputError("joint spectral amplitude is identically zero");
    amplitude /= std::sqrt(m);
  }

  JointSpectralIntensity intensity() const { return {grid, amplitude.cwiseAbs2()}; }
  JointSpectralAmplitude transposed() const { return {grid.transposed(), amplitude.transpose()}; }
};

/// sin(x)/x with a series branch near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

inline cplx pump_envelope_value(const PumpEnvelope& pump, double omega_s, double omega_i) {
  const double s = pump.two_photon_sigma();
  const double d = omega_s + omega_i - 2.0 * pump.omega;
  return {std::exp(-d * d / (4.0 * s * s)), 0.0};
}

/// sinc(ΔkL/2) exp(iΔkL/2) for a given phase mismatch.
inline cplx phasematching_from_mismatch(double delta_k, double length) {
  const double x = 0.5 * delta_k * length;
  return sinc(x) * cplx(std::cos(x), std::sin(x));
}

inline cplx phasematching_value(const DispersionModel& model, double omega_s, double omega_i) {
  return phasematching_from_mismatch(phase_mismatch_pair(model, omega_s, omega_i), model.length);
}

/// Phasematching function of a fibre, usable wherever a
/// `(double ωs, double ωi) -> complex` callable is accepted.
struct FibrePhasematching {
  DispersionModel model;
  cplx operator()(double omega_s, double omega_i) const { return phasematching_value(model, omega_s, omega_i); }
};

template <class F>
concept PhasematchingFunction = requires(const F& f, double a, double b) {
  { f(a, b) } -> std::convertible_to<cplx>;
};

/// Fills α·φ on the grid and normalises. Rows are filled independently.
template <PhasematchingFunction Phasematching>
JointSpectralAmplitude build_jsa(const Phasematching& phasematching, const PumpEnvelope& pump,
                                 const FrequencyGrid& grid) {
  pump.validate();
  grid.validate();
  JointSpectralAmplitude jsa{grid, Eigen::MatrixXcd(grid.signal.count, grid.idler.count)};
  for (int j = 0; j < grid.signal.count; ++j) {
    const double ws = grid.signal.at(j);
    for (int k = 0; k < grid.idler.count; ++k) {
      const double wi = grid.idler.at(k);
      jsa.amplitude(j, k) = pump_envelope_value(pump, ws, wi) * cplx(phasematching(ws, wi));
    }
  }
  jsa.normalize();
  return jsa;
}

inline JointSpectralAmplitude build_jsa(const DispersionModel& model, const PumpEnvelope& pump,
                                        const FrequencyGrid& grid) {
  model.validate();
  const auto w = model.window();
  if (!w.contains(grid.signal.front()) || !w.contains(grid.signal.back()) || !w.contains(grid.idler.front()) ||
      !w.contains(grid.idler.back()))
    throw DomainError("frequency grid extends outside the dispersion validity window");
  return build_jsa(FibrePhasematching{model}, pump, grid);
}

struct OperatingPoint {
  double signal = 0.0;  // rad/s
  double idler = 0.0;   // rad/s
  /// Idler-axis distance between the sinc peak and its first zero, rad/s.
  double phasematching_bandwidth = 0.0;
};

inline OperatingPoint operating_point(const DispersionModel& model, double pump_omega) {
  const double detuning = outer_sideband_detuning(model, pump_omega);
  OperatingPoint op;
  op.signal = pump_omega + detuning;
  op.idler = pump_omega - detuning;
  detail::require_in_window(model, op.signal, "phasematched signal");
  detail::require_in_window(model, op.idler, "phasematched idler");
  // ∂Δk/∂ωi = β₁(ω̄) − β₁(ωi), with ω̄ = pump at the operating point.
  const double slope = detail::beta1_rel(model, pump_omega) - detail::beta1_rel(model, op.idler);
  if (slope == 0.0) throw DomainError("idler is group-velocity matched to the pump; phasematching bandwidth unbounded");
  op.phasematching_bandwidth = units::kTwoPi / (model.length * std::abs(slope));
  return op;
}

/// Default grid about the operating point: signal half-span
/// factor·hypot(σ, w/2), idler half-span factor·w (w = phasematching
/// bandwidth), both clipped to the validity window.
inline FrequencyGrid default_grid(const DispersionModel& model, const PumpEnvelope& pump, int signal_points = 256,
                                  int idler_points = 256, double span_factor = 5.0) {
  const auto op = operating_point(model, pump.omega);
  const auto w = model.window();
  const double margin = 1.0 - 1e-9;
  double hs = span_factor * std::hypot(pump.sigma, 0.5 * op.phasematching_bandwidth);
  double hi = span_factor * op.phasematching_bandwidth;
  hs = std::min({hs, (w.hi - op.signal) * margin, (op.signal - w.lo) * margin});
  hi = std::min({hi, (w.hi - op.idler) * margin, (op.idler - w.lo) * margin});
  FrequencyGrid g{{op.signal, 2.0 * hs, signal_points}, {op.idler, 2.0 * hi, idler_points}};
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Δk = 0 contours over a pump scan.

struct ContourPoint {
  double pump = 0.0;    // rad/s
  double signal = 0.0;  // rad/s
  double idler = 0.0;   // rad/s
};

struct ContourBranch {
  std::string label;  // "signal", "idler" or "degenerate"
  bool closed = false;
  std::vector<ContourPoint> points;
};

namespace detail {

struct SidebandRoots {
  double y[2] = {0.0, 0.0};  // Ω², inner then outer
  bool valid[2] = {false, false};
};

inline SidebandRoots sideband_roots(const DispersionModel& m, double pump) {
  SidebandRoots r;
  const auto w = m.window();
  if (!w.contains(pump)) return r;
  const auto roots = real_quadratic_roots(m.beta4 / 12.0, beta2_unchecked(m, pump), m.nonlinear_phase());
  // Map roots onto the inner/outer slots. A linear equation has one root and
  // it goes to the outer slot.
  if (roots.size() == 2) {
    r.y[0] = roots[0];
    r.y[1] = roots[1];
    r.valid[0] = r.valid[1] = true;
  } else if (roots.size() == 1) {
    r.y[1] = r.y[0] = roots[0];
    r.valid[1] = true;
    r.valid[0] = (m.beta4 != 0.0);  // a double root belongs to both branches
  }
  for (int b = 0; b < 2; ++b) {
    if (!r.valid[b]) continue;
    const double y = r.y[b];
    if (!(y > 0.0)) {
      r.valid[b] = false;
      continue;
    }
    const double o = std::sqrt(y);
    if (!w.contains(pump + o) || !w.contains(pump - o)) r.valid[b] = false;
  }
  return r;
}

inline double merge_discriminant(const DispersionModel& m, double pump) {
  const double b = beta2_unchecked(m, pump);
  return b * b - 4.0 * (m.beta4 / 12.0) * m.nonlinear_phase();
}

struct BranchRun {
  int branch = 0;
  std::vector<std::pair<double, double>> pts;  // (pump, Ω)
  bool start_merge = false;
  bool end_merge = false;
};

}  // namespace detail

/// Sideband solutions of Δk(Ω; ωp) = 0 for pump frequencies in
/// [pump_lo, pump_hi]. Inner and outer solutions that meet at both ends of
/// their pump interval form a closed loop; each Ω-polyline is emitted once
/// as a "signal" branch (ωp + Ω) and once as an "idler" branch (ωp − Ω).
inline std::vector<ContourBranch> phasematching_contour(const DispersionModel& model, double pump_lo, double pump_hi,
                                                        int samples = 2001) {
  model.validate();
  if (!(pump_hi > pump_lo) || samples < 3) throw DomainError("pump scan needs an increasing range and >= 3 samples");
  const double tol = 1e-3 * units::kTwoPi / model.length;
  const double step = (pump_hi - pump_lo) / (samples - 1);
  auto pump_at = [&](int k) { return pump_lo + step * k; };

  std::vector<detail::BranchRun> runs;
  for (int branch = 0; branch < 2; ++branch) {
    auto valid_at = [&](double p) { return detail::sideband_roots(model, p).valid[branch]; };
    auto omega_at = [&](double p) { return std::sqrt(detail::sideband_roots(model, p).y[branch]); };
    // Bisect between a valid and an invalid pump frequency; returns the last
    // valid point and whether the branch ended by merging with its partner.
    auto refine = [&](double good, double bad) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (good + bad);
        if (mid == good || mid == bad) break;
        (valid_at(mid) ? good : bad) = mid;
      }
      const bool merges = detail::merge_discriminant(model, bad) < 0.0 && model.beta4 != 0.0;
      return std::pair{good, merges};
    };
    detail::BranchRun current;
    bool open = false;
    for (int k = 0; k < samples; ++k) {
      const double p = pump_at(k);
      const bool v = valid_at(p);
      if (v && !open) {
        current = {};
        current.branch = branch;
        if (k > 0) {
          auto [edge, merges] = refine(p, pump_at(k - 1));
          current.start_merge = merges;
          if (edge != p) current.pts.emplace_back(edge, omega_at(edge));
        }
        open = true;
      }
      if (v) current.pts.emplace_back(p, omega_at(p));
      if (!v && open) {
        auto [edge, merges] = refine(pump_at(k - 1), p);
        current.end_merge = merges;
        if (edge != current.pts.back().first) current.pts.emplace_back(edge, omega_at(edge));
        runs.push_back(std::move(current));
        open = false;
      }
    }
    if (open) runs.push_back(std::move(current));
  }

  // At a merge the two roots coincide at y = −b/(2a); pin the shared end
  // point to that double root so joined polylines meet exactly.
  auto merge_point = [&](double pump) {
    const double y = -detail::beta2_unchecked(model, pump) / (2.0 * model.beta4 / 12.0);
    return std::pair{pump, std::sqrt(std::max(y, 0.0))};
  };
  const double join_tol = 4.0 * step;
  std::vector<std::pair<std::vector<std::pair<double, double>>, bool>> polylines;
  std::vector<bool> used(runs.size(), false);
  for (std::size_t a = 0; a < runs.size(); ++a) {
    if (used[a] || runs[a].branch != 1) continue;
    used[a] = true;
    auto outer = runs[a];
    std::vector<std::pair<double, double>> line = outer.pts;
    bool closed = false;
    for (std::size_t b = 0; b < runs.size(); ++b) {
      if (used[b] || runs[b].branch != 0) continue;
      const auto& inner = runs[b];
      const bool join_end = outer.end_merge && inner.end_merge &&
                            std::abs(outer.pts.back().first - inner.pts.back().first) < join_tol;
      const bool join_start = outer.start_merge && inner.start_merge &&
                              std::abs(outer.pts.front().first - inner.pts.front().first) < join_tol;
      if (!join_end && !join_start) continue;
      used[b] = true;
      if (join_end) {
        line.back() = merge_point(line.back().first);
        for (auto it = inner.pts.rbegin() + 1; it != inner.pts.rend(); ++it) line.push_back(*it);
        if (join_start) {
          line.front() = merge_point(line.front().first);
          line.back() = line.front();
          closed = true;
        }
      } else {
        std::vector<std::pair<double, double>> joined(inner.pts.rbegin(), inner.pts.rend());
        joined.back() = merge_point(outer.pts.front().first);
        joined.insert(joined.end(), outer.pts.begin() + 1, outer.pts.end());
        line = std::move(joined);
      }
      break;
    }
    polylines.emplace_back(std::move(line), closed);
  }
  for (std::size_t b = 0; b < runs.size(); ++b)
    if (!used[b]) polylines.emplace_back(runs[b].pts, false);

  std::vector<ContourBranch> out;
  for (const auto& [line, closed] : polylines) {
    ContourBranch sig{"signal", closed, {}};
    ContourBranch idl{"idler", closed, {}};
    for (const auto& [p, o] : line) {
      sig.points.push_back({p, p + o, p - o});
      idl.points.push_back({p, p + o, p - o});
    }
    out.push_back(std::move(sig));
    out.push_back(std::move(idl));
  }
  if (std::abs(model.nonlinear_phase()) < tol) {
    ContourBranch deg{"degenerate", false, {}};
    const auto w = model.window();
    for (int k = 0; k < samples; ++k) {
      const double p = pump_at(k);
      if (w.contains(p)) deg.points.push_back({p, p, p});
    }
    if (!deg.points.empty()) out.push_back(std::move(deg));
  }
  return out;
}

/// Idler frequency on the Δk = 0 curve for a fixed signal frequency, searched
/// within ±half_width of `idler_guess`. NaN when the bracket holds no root.
inline double phasematched_idler(const DispersionModel& model, double omega_s, double idler_guess,
                                 double half_width) {
  auto f = [&](double wi) { return phase_mismatch_pair(model, omega_s, wi); };
  double lo = idler_guess - half_width;
  double hi = idler_guess + half_width;
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace photonmux
