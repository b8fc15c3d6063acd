#pragma once

#include <cmath>
#include <numbers>

namespace photonmux::units {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double angular_frequency(double wavelength_m) { return kTwoPi * kSpeedOfLight / wavelength_m; }
inline double wavelength(double angular_frequency) { return kTwoPi * kSpeedOfLight / angular_frequency; }

inline double nm(double value) { return value * 1e-9; }
inline double to_nm(double metres) { return metres * 1e9; }

// Spectral width conversion about a centre wavelength: dω = 2πc dλ / λ².
inline double bandwidth_rad_s(double bandwidth_m, double centre_wavelength_m) {
  return kTwoPi * kSpeedOfLight * bandwidth_m / (centre_wavelength_m * centre_wavelength_m);
}
inline double bandwidth_m(double bandwidth_rad_s, double centre_wavelength_m) {
  return bandwidth_rad_s * centre_wavelength_m * centre_wavelength_m / (kTwoPi * kSpeedOfLight);
}

/// Power transmission of a loss given in dB (positive = attenuation).
inline double transmission_from_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }
inline double loss_db_from_transmission(double t) { return -10.0 * std::log10(t); }

}  // namespace photonmux::units
