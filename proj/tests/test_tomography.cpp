#include <gtest/gtest.h>

#include <cmath>

#include <photonmux/tomography.hpp>

#include "common.hpp"

using namespace photonmux;

namespace {

const FrequencyGrid kGrid{{0.0, 10.0, 81}, {0.0, 10.0, 61}};

JointSpectralAmplitude separable(double ws, double wi) {
  JointSpectralAmplitude f{kGrid, Eigen::MatrixXcd(81, 61)};
  for (int j = 0; j < 81; ++j)
    for (int k = 0; k < 61; ++k) {
      const double x = kGrid.signal.at(j) / ws, y = kGrid.idler.at(k) / wi;
      f.amplitude(j, k) = std::exp(-0.5 * x * x - 0.5 * y * y);
    }
  f.normalize();
  return f;
}

JointSpectralAmplitude scrambled_phase(JointSpectralAmplitude f) {
  for (int j = 0; j < f.amplitude.rows(); ++j)
    for (int k = 0; k < f.amplitude.cols(); ++k) f.amplitude(j, k) *= std::polar(1.0, 6.283 * std::sin(12.9898 * j + 78.233 * k));
  return f;
}

double abs_cooperativity(const JointSpectralIntensity& jsi) {
  return cooperativity(schmidt_decompose(jsi, MagnitudeKind::magnitude));
}

}  // namespace

TEST(Stimulated, SeparableSlicesShareOneShape) {
  const auto f = separable(1.0, 2.0);
  const auto a = stimulated_spectrum(f, kGrid.idler.at(10)).intensity;
  const auto b = stimulated_spectrum(f, kGrid.idler.at(33)).intensity;
  EXPECT_LT((a / a.sum() - b / b.sum()).norm(), 1e-13);
}

TEST(Stimulated, InterpolatesBetweenColumns) {
  const auto f = separable(1.0, 2.0);
  const double w = 0.25 * kGrid.idler.at(4) + 0.75 * kGrid.idler.at(5);
  const auto s = stimulated_spectrum(f, w).intensity;
  const Eigen::VectorXd want = 0.25 * f.amplitude.col(4).cwiseAbs2() + 0.75 * f.amplitude.col(5).cwiseAbs2();
  EXPECT_LT((s - want).norm() / want.norm(), 1e-12);
}

TEST(Stimulated, SeedOutsideGridThrows) {
  const auto f = separable(1.0, 2.0);
  EXPECT_THROW(stimulated_spectrum(f, kGrid.idler.back() + 0.1), DomainError);
  EXPECT_NO_THROW(stimulated_spectrum(f, kGrid.idler.back()));
}

TEST(Reconstruct, ZeroColumnStaysZero) {
  auto f = separable(1.0, 2.0);
  f.amplitude.col(20).setZero();
  const auto r = reconstruct_jsi(f, grid_aligned_sweep(f.grid));
  EXPECT_EQ(r.jsi.intensity.col(20).norm(), 0.0);
  EXPECT_NEAR(r.jsi.mass(), 1.0, 1e-12);
}

TEST(Reconstruct, RecoversUnequalMarginalWidths) {
  const auto f = separable(0.8, 1.6);
  const auto r = reconstruct_jsi(f, grid_aligned_sweep(f.grid));
  const auto m = marginal_moments(r.jsi);
  // |f|² is Gaussian with rms w/√2 in each variable.
  EXPECT_NEAR(m.signal_rms, 0.8 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(m.idler_rms, 1.6 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(m.signal_mean, 0.0, 1e-12);
}

TEST(Reconstruct, GridAlignedSweepIsExact) {
  const auto f = testing_support::reference_jsa(128);
  const auto r = reconstruct_jsi(f, grid_aligned_sweep(f.grid));
  EXPECT_LT(reconstruction_error(r.jsi, f), 1e-9);
  EXPECT_FALSE(r.sweep.reversed);
}

TEST(Reconstruct, HalfDensitySweepKeepsCooperativity) {
  const auto f = testing_support::reference_jsa(128);
  const double k_true = abs_cooperativity(f.intensity());
  const auto r = reconstruct_jsi(f, grid_aligned_sweep(f.grid, 2));
  EXPECT_LT(std::abs(abs_cooperativity(r.jsi) - k_true) / k_true, 0.02);
}

TEST(Reconstruct, BlindToSpectralPhase) {
  const auto f = testing_support::reference_jsa(96);
  const auto seeds = uniform_sweep(f.grid.idler.front(), f.grid.idler.back(), 70);
  const auto a = reconstruct_jsi(f, seeds);
  const auto b = reconstruct_jsi(scrambled_phase(f), seeds);
  EXPECT_LT((a.jsi.intensity - b.jsi.intensity).norm() / a.jsi.intensity.norm(), 1e-12);
}

TEST(Reconstruct, ErrorShrinksWithDenserSweeps) {
  const auto f = testing_support::reference_jsa(128);
  double prev = 1e300;
  for (int n : {12, 24, 48, 96}) {
    const double e = reconstruction_error(reconstruct_jsi(f, uniform_sweep(f.grid.idler.front(), f.grid.idler.back(), n)).jsi, f);
    EXPECT_LT(e, prev) << n;
    prev = e;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(Reconstruct, DescendingSweepIsReversed) {
  const auto f = separable(1.0, 2.0);
  auto seeds = uniform_sweep(-3.0, 3.0, 25);
  const auto a = reconstruct_jsi(f, seeds);
  std::reverse(seeds.begin(), seeds.end());
  const auto b = reconstruct_jsi(f, seeds);
  EXPECT_TRUE(b.sweep.reversed);
  EXPECT_EQ(a.jsi.intensity, b.jsi.intensity);
}

TEST(Reconstruct, RejectsBadSweeps) {
  const auto f = separable(1.0, 2.0);
  EXPECT_THROW(reconstruct_jsi(f, {}), DegenerateInputError);
  EXPECT_THROW(reconstruct_jsi(f, {0.0}), DomainError);
  EXPECT_THROW(reconstruct_jsi(f, {0.0, 1.0, 3.0}), DomainError);
  EXPECT_THROW(reconstruct_jsi(f, {0.0, 1.0, 0.5}), DomainError);
  EXPECT_THROW(reconstruct_jsi(f, uniform_sweep(0.0, 8.0, 5)), DomainError);
}

TEST(Reconstruct, SpectrometerResolutionBroadensSignal) {
  const auto f = separable(0.8, 1.6);
  const auto seeds = grid_aligned_sweep(f.grid);
  const auto sharp = marginal_moments(reconstruct_jsi(f, seeds).jsi);
  TomographyOptions opt;
  opt.osa_resolution = 0.5;
  const auto r = reconstruct_jsi(f, seeds, opt);
  const auto broad = marginal_moments(r.jsi);
  EXPECT_NEAR(r.jsi.mass(), 1.0, 1e-12);
  EXPECT_NEAR(broad.signal_rms, std::hypot(sharp.signal_rms, 0.5), 2e-3);
  EXPECT_NEAR(broad.idler_rms, sharp.idler_rms, 1e-12);
}

TEST(Reconstruct, PumpTuningMovesSignalNotIdler) {
  const auto& c = testing_support::reference_config();
  const auto m = c.dispersion.model();
  std::vector<double> sig, idl;
  for (double nm : {1062.0, 1064.0, 1066.0}) {
    auto pump = c.pump.envelope();
    pump.omega = units::angular_frequency(nm * 1e-9);
    const auto f = build_jsa(m, pump, default_grid(m, pump, 128, 128));
    const auto r = reconstruct_jsi(f, uniform_sweep(f.grid.idler.front(), f.grid.idler.back(), 64));
    const auto mm = marginal_moments(r.jsi);
    sig.push_back(units::to_nm(units::wavelength(mm.signal_mean)));
    idl.push_back(units::to_nm(units::wavelength(mm.idler_mean)));
  }
  EXPECT_GT(sig[1], sig[0] + 1.0);
  EXPECT_GT(sig[2], sig[1] + 1.0);
  EXPECT_LT(std::abs(idl[2] - idl[0]), 0.25 * (sig[2] - sig[0]));
}

TEST(Resample, IdentityOnSameGrid) {
  const auto f = separable(1.0, 2.0).intensity();
  EXPECT_LT((resample(f, f.grid) - f.intensity).norm(), 1e-15);
}
