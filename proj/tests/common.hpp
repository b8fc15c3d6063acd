#pragma once

#include <photonmux/photonmux.hpp>

#include <string>

namespace testing_support {

inline std::string source_path(const std::string& rel) { return std::string(PHOTONMUX_SOURCE_DIR) + "/" + rel; }

inline const photonmux::RunConfig& reference_config() {
  static const photonmux::RunConfig c = [] {
    auto cfg = photonmux::load_config(source_path("configs/reference.yaml"));
    cfg.validate();
    return cfg;
  }();
  return c;
}

inline photonmux::DispersionModel reference_model() { return reference_config().dispersion.model(); }

inline photonmux::JointSpectralAmplitude reference_jsa(int points = 256) {
  const auto& c = reference_config();
  const auto model = c.dispersion.model();
  const auto pump = c.pump.envelope();
  return photonmux::build_jsa(model, pump, photonmux::default_grid(model, pump, points, points, c.grid.span_factor));
}

/// |x − expected| in units of the standard error.
inline double pull(double x, double expected, double sigma) { return std::abs(x - expected) / sigma; }

}  // namespace testing_support
