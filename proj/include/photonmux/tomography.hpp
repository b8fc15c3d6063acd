#pragma once

// Stimulated emission tomography: an ideal monochromatic seed at idler
// frequency ωi stimulates a signal spectrum ∝ |f(ωs, ωi)|². Stacking the
// spectra over a seed sweep gives the joint spectral intensity. The phase of
// f never enters.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "photonmux/error.hpp"
#include "photonmux/jsa.hpp"

namespace photonmux {

struct SignalSpectrum {
  Axis signal;
  Eigen::VectorXd intensity;
};

namespace detail {

// Column index and fraction for linear interpolation on an axis; throws if
// ω lies outside it.
inline std::pair<int, double> bracket(const Axis& axis, double omega, const char* what) {
  const double tol = 1e-12 * axis.span;
  if (!(omega >= axis.front() - tol && omega <= axis.back() + tol)) {
    throw DomainError(std::string(what) + " " + std::to_string(omega) + " rad/s lies outside the grid span [" +
                      std::to_string(axis.front()) + ", " + std::to_string(axis.back()) + "]");
  }
  double x = (omega - axis.front()) / axis.step();
  x = std::clamp(x, 0.0, static_cast<double>(axis.count - 1));
  int k = static_cast<int>(std::floor(x));
  if (k >= axis.count - 1) k = axis.count - 2;
  double t = x - k;
  // Snap to a grid column when the seed sits on it up to rounding.
  if (t < 1e-9) t = 0.0;
  if (t > 1.0 - 1e-9) {
    t = 0.0;
    ++k;
    if (k == axis.count - 1) {
      k = axis.count - 2;
      t = 1.0;
    }
  }
  return {k, t};
}

inline Eigen::VectorXd gaussian_smooth(const Eigen::VectorXd& v, double step, double sigma) {
  if (!(sigma > 0.0)) return v;
  const int n = static_cast<int>(v.size());
  const int half = std::max(1, static_cast<int>(std::ceil(5.0 * sigma / step)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int d = -half; d <= half; ++d) {
    const double x = d * step / sigma;
    kernel[static_cast<std::size_t>(d + half)] = std::exp(-0.5 * x * x);
    sum += kernel[static_cast<std::size_t>(d + half)];
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int d = -half; d <= half; ++d) {
      const int s = j + d;
      if (s >= 0 && s < n) out(j) += kernel[static_cast<std::size_t>(d + half)] / sum * v(s);
    }
  return out;
}

}  // namespace detail

/// Signal spectrum stimulated by a seed at `seed_omega` (idler frequency):
/// |A|² interpolated linearly between the two neighbouring idler columns.
inline SignalSpectrum stimulated_spectrum(const JointSpectralAmplitude& jsa, double seed_omega) {
  const auto [k, t] = detail::bracket(jsa.grid.idler, seed_omega, "seed frequency");
  SignalSpectrum s{jsa.grid.signal, jsa.amplitude.col(k).cwiseAbs2()};
  if (t != 0.0) s.intensity = (1.0 - t) * s.intensity + t * jsa.amplitude.col(k + 1).cwiseAbs2();
  return s;
}

struct TomographyOptions {
  /// RMS width (rad/s) of a Gaussian spectrometer response along the signal
  /// axis; 0 disables smoothing.
  double osa_resolution = 0.0;
};

struct SweepMetadata {
  std::vector<double> seeds;  // ascending, rad/s
  bool reversed = false;      // input sweep was descending
  double osa_resolution = 0.0;
};

struct Reconstruction {
  JointSpectralIntensity jsi;  // columns = seeds
  SweepMetadata sweep;
};

/// Uniform sweep of `count` seeds over [lo, hi].
inline std::vector<double> uniform_sweep(double lo, double hi, int count) {
  if (count < 2) throw DomainError("a seed sweep needs at least 2 points");
  std::vector<double> s(static_cast<std::size_t>(count));
  const double step = (hi - lo) / (count - 1);
  for (int k = 0; k < count; ++k) s[static_cast<std::size_t>(k)] = lo + step * k;
  s.back() = hi;
  return s;
}

inline Reconstruction reconstruct_jsi(const JointSpectralAmplitude& jsa, std::vector<double> seeds,
                                      const TomographyOptions& opt = {}) {
  if (seeds.empty()) throw DegenerateInputError("empty seed sweep");
  if (seeds.size() < 2) throw DomainError("a seed sweep needs at least 2 points");
  Reconstruction r;
  r.sweep.osa_resolution = opt.osa_resolution;
  if (seeds.front() > seeds.back()) {
    std::reverse(seeds.begin(), seeds.end());
    r.sweep.reversed = true;
  }
  const auto n = static_cast<int>(seeds.size());
  const double step = (seeds.back() - seeds.front()) / (n - 1);
  if (!(step > 0.0)) throw DomainError("seed sweep must be strictly monotone");
  for (int k = 1; k < n; ++k) {
    const double d = seeds[static_cast<std::size_t>(k)] - seeds[static_cast<std::size_t>(k - 1)];
    if (!(d > 0.0)) throw DomainError("seed sweep must be strictly monotone");
    if (std::abs(d - step) > 1e-6 * step) throw DomainError("seed sweep must be uniformly spaced");
  }

  r.jsi.grid.signal = jsa.grid.signal;
  r.jsi.grid.idler = Axis{0.5 * (seeds.front() + seeds.back()), seeds.back() - seeds.front(), n};
  r.jsi.intensity.resize(jsa.grid.signal.count, n);
  for (int k = 0; k < n; ++k) {
    auto s = stimulated_spectrum(jsa, seeds[static_cast<std::size_t>(k)]);
    r.jsi.intensity.col(k) = detail::gaussian_smooth(s.intensity, jsa.grid.signal.step(), opt.osa_resolution);
  }
  r.jsi.normalize();
  r.sweep.seeds = std::move(seeds);
  return r;
}

/// Seeds placed exactly on every `stride`-th idler grid column.
inline std::vector<double> grid_aligned_sweep(const FrequencyGrid& grid, int stride = 1) {
  if (stride < 1) throw DomainError("sweep stride must be >= 1");
  std::vector<double> s;
  for (int k = 0; k < grid.idler.count; k += stride) s.push_back(grid.idler.at(k));
  return s;
}

/// Bilinear resampling of an intensity onto another grid; zero outside the
/// source grid.
inline Eigen::MatrixXd resample(const JointSpectralIntensity& src, const FrequencyGrid& target) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(target.signal.count, target.idler.count);
  auto locate = [](const Axis& a, double w, int& k, double& t) {
    const double tol = 1e-12 * a.span;
    if (w < a.front() - tol || w > a.back() + tol) return false;
    const auto b = detail::bracket(a, std::clamp(w, a.front(), a.back()), "frequency");
    k = b.first;
    t = b.second;
    return true;
  };
  for (int j = 0; j < target.signal.count; ++j) {
    int js;
    double ts;
    if (!locate(src.grid.signal, target.signal.at(j), js, ts)) continue;
    for (int k = 0; k < target.idler.count; ++k) {
      int ki;
      double ti;
      if (!locate(src.grid.idler, target.idler.at(k), ki, ti)) continue;
      const auto& m = src.intensity;
      out(j, k) = (1 - ts) * (1 - ti) * m(js, ki) + ts * (1 - ti) * m(js + 1, ki) + (1 - ts) * ti * m(js, ki + 1) +
                  ts * ti * m(js + 1, ki + 1);
    }
  }
  return out;
}

/// Relative L2 distance between a reconstruction (resampled onto the true
/// grid) and the true intensity, both normalised to unit mass there.
inline double reconstruction_error(const JointSpectralIntensity& reconstructed, const JointSpectralIntensity& truth) {
  Eigen::MatrixXd r = resample(reconstructed, truth.grid);
  Eigen::MatrixXd t = truth.intensity;
  const double rs = r.sum();
  const double ts = t.sum();
  if (!(rs > 0.0) || !(ts > 0.0)) throw DegenerateInputError("cannot compare an empty spectrum");
  r /= rs;
  t /= ts;
  return (r - t).norm() / t.norm();
}

inline double reconstruction_error(const JointSpectralIntensity& reconstructed, const JointSpectralAmplitude& truth) {
  return reconstruction_error(reconstructed, truth.intensity());
}

/// First and second moments of the two marginals of an intensity.
struct MarginalMoments {
  double signal_mean = 0.0;
  double idler_mean = 0.0;
  double signal_rms = 0.0;
  double idler_rms = 0.0;
};

inline MarginalMoments marginal_moments(const JointSpectralIntensity& jsi) {
  const Eigen::VectorXd ms = jsi.intensity.rowwise().sum();
  const Eigen::VectorXd mi = jsi.intensity.colwise().sum().transpose();
  auto moments = [](const Axis& a, const Eigen::VectorXd& m, double& mean, double& rms) {
    const double total = m.sum();
    if (!(total > 0.0)) throw DegenerateInputError("marginal has no mass");
    mean = 0.0;
    for (int k = 0; k < a.count; ++k) mean += a.at(k) * m(k);
    mean /= total;
    double var = 0.0;
    for (int k = 0; k < a.count; ++k) var += (a.at(k) - mean) * (a.at(k) - mean) * m(k);
    rms = std::sqrt(var / total);
  };
  MarginalMoments out;
  moments(jsi.grid.signal, ms, out.signal_mean, out.signal_rms);
  moments(jsi.grid.idler, mi, out.idler_mean, out.idler_rms);
  return out;
}

}  // namespace photonmux
