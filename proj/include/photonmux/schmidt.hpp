#pragma once

// Schmidt decomposition of a sampled two-photon spectrum and the figures of
// merit derived from its weights.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "photonmux/error.hpp"
#include "photonmux/jsa.hpp"

namespace photonmux {

struct SchmidtDecomposition {
  FrequencyGrid grid;
  /// Retained weights λⱼ (above the cutoff), descending, Σ = 1.
  std::vector<double> weights;
  /// Columns are mode functions sampled on the grid, orthonormal under
  /// Σ conj(a) b · step. All modes are kept, including those whose weight
  /// fell below the cutoff; the first mode_count() match `weights`.
  Eigen::MatrixXcd signal_modes;
  Eigen::MatrixXcd idler_modes;
  /// Amplitudes of every mode in input units: A = Σ aⱼ ξⱼ ζⱼ, aⱼ ∝ √λⱼ.
  Eigen::VectorXd amplitudes;
  /// ‖A − Σ aⱼ ξⱼ ζⱼ‖ / ‖A‖.
  double reconstruction_error = 0.0;

  std::size_t mode_count() const { return weights.size(); }
  Eigen::MatrixXcd reconstruct() const;
};

struct SchmidtOptions {
  /// Weights below this are treated as numerical noise and dropped before
  /// renormalising.
  double weight_cutoff = 1e-12;
};

inline Eigen::MatrixXcd SchmidtDecomposition::reconstruct() const {
  return signal_modes * amplitudes.asDiagonal() * idler_modes.transpose();
}

namespace detail {

inline SchmidtDecomposition decompose_matrix(const FrequencyGrid& grid, const Eigen::MatrixXcd& a,
                                             const SchmidtOptions& opt) {
  const double ds = grid.signal.step();
  const double di = grid.idler.step();
  const double frob = a.norm();
  if (!(frob > 0.0) || !std::isfinite(frob)) throw DegenerateInputError("cannot decompose an all-zero spectrum");

  const Eigen::MatrixXcd scaled = a * std::sqrt(ds * di);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  SchmidtDecomposition d;
  d.grid = grid;
  const double total = sv.squaredNorm();
  std::vector<double> w;
  for (Eigen::Index m = 0; m < sv.size(); ++m) {
    const double lambda = sv(m) * sv(m) / total;
    if (lambda < opt.weight_cutoff) break;  // singular values are sorted
    w.push_back(lambda);
  }
  if (w.empty()) throw DegenerateInputError("no Schmidt weight above cutoff");
  const double kept = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= kept;
  d.weights = std::move(w);

  d.signal_modes = svd.matrixU() / std::sqrt(ds);
  d.idler_modes = svd.matrixV().conjugate() / std::sqrt(di);
  d.amplitudes = sv;
  const Eigen::MatrixXcd rec = d.reconstruct();
  d.reconstruction_error = (rec - a).norm() / frob;
  return d;
}

}  // namespace detail

inline SchmidtDecomposition schmidt_decompose(const JointSpectralAmplitude& jsa, const SchmidtOptions& opt = {}) {
  return detail::decompose_matrix(jsa.grid, jsa.amplitude, opt);
}

/// Which real-valued surrogate of an intensity-only measurement to decompose.
enum class MagnitudeKind {
  magnitude,  // |f|
  intensity,  // |f|²
};

inline const char* to_string(MagnitudeKind k) { return k == MagnitudeKind::magnitude ? "abs" : "abs_squared"; }

/// Decomposes |f| or |f|² built from a measured intensity. Phase is lost, so
/// the resulting purity is an upper bound on the true heralded purity.
inline SchmidtDecomposition schmidt_decompose(const JointSpectralIntensity& jsi, MagnitudeKind kind,
                                              const SchmidtOptions& opt = {}) {
  Eigen::MatrixXd m = (kind == MagnitudeKind::magnitude) ? jsi.magnitude() : Eigen::MatrixXd(jsi.intensity);
  return detail::decompose_matrix(jsi.grid, m.cast<cplx>(), opt);
}

inline double sum_of_squared_weights(const SchmidtDecomposition& d) {
  double s = 0.0;
  for (double x : d.weights) s += x * x;
  return s;
}

/// Cooperativity K = 1/Σλ².
inline double cooperativity(const SchmidtDecomposition& d) { return 1.0 / sum_of_squared_weights(d); }

/// Heralded purity P = 1/K.
inline double heralded_purity(const SchmidtDecomposition& d) { return 1.0 / cooperativity(d); }

/// Marginal second-order coherence expected from the mode structure, 1 + P.
inline double predicted_g2m(const SchmidtDecomposition& d) { return 1.0 + heralded_purity(d); }

/// Purity from raw weights (not necessarily normalised): Σλ²/(Σλ)².
inline double purity_from_weights(const std::vector<double>& weights) {
  double s = 0.0;
  double s2 = 0.0;
  for (double x : weights) {
    s += x;
    s2 += x * x;
  }
  return s2 / (s * s);
}

/// (Σ|A||B| cellArea)² / (Σ|A|² cellArea · Σ|B|² cellArea) over magnitude
/// matrices sampled on the same grid.
inline double spectral_overlap(const FrequencyGrid& grid_a, const Eigen::MatrixXd& magnitude_a,
                               const FrequencyGrid& grid_b, const Eigen::MatrixXd& magnitude_b) {
  if (!(grid_a == grid_b) || magnitude_a.rows() != magnitude_b.rows() || magnitude_a.cols() != magnitude_b.cols())
    throw GridMismatchError("spectral overlap needs both spectra on the same grid");
  const double ca = grid_a.cell_area();
  const double cross = (magnitude_a.cwiseAbs().array() * magnitude_b.cwiseAbs().array()).sum() * ca;
  const double na = magnitude_a.squaredNorm() * ca;
  const double nb = magnitude_b.squaredNorm() * ca;
  if (!(na > 0.0) || !(nb > 0.0)) throw DegenerateInputError("spectral overlap of an empty spectrum");
  return std::clamp(cross * cross / (na * nb), 0.0, 1.0);
}

inline double spectral_overlap(const JointSpectralAmplitude& a, const JointSpectralAmplitude& b) {
  return spectral_overlap(a.grid, a.amplitude.cwiseAbs(), b.grid, b.amplitude.cwiseAbs());
}

inline double spectral_overlap(const JointSpectralIntensity& a, const JointSpectralIntensity& b) {
  return spectral_overlap(a.grid, a.magnitude(), b.grid, b.magnitude());
}

}  // namespace photonmux
