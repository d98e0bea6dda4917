#pragma once

#include <complex>
#include <numbers>

namespace fastlight {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = std::numbers::pi;

// Telecom operating point of the reference setup.
inline constexpr double kDefaultWavelength = 1.55e-6;   // m
inline constexpr double kDefaultLength = 1.5;           // m
inline constexpr double kDefaultFiberIndex = 1.5;
inline constexpr double kDefaultDgd = 2.66e-12;         // s

/// |A + B| (equivalently |<phi|psi0>|) below this is treated as orthogonal.
inline constexpr double kOrthogonalityTolerance = 1e-9;

/// |G| at or below this is reported as full extinction.
inline constexpr double kExtinctionFloor = 1e-15;

constexpr double carrier_omega(double wavelength) noexcept {
  return 2.0 * kPi * kSpeedOfLight / wavelength;
}

}  // namespace fastlight
