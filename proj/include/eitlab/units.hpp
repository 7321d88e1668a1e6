#pragma once

// Unit conventions used throughout the library:
//   lengths            cm
//   diffusion          cm^2/s
//   magnetic field     G (gradients in G/cm)
//   angular frequency  rad/s internally; every external surface (CSV, CLI,
//                      reports) carries cyclic frequency in Hz, converted
//                      with the 2*pi factor applied exactly once
//   temperature        K, mass kg, power W

#include <cmath>
#include <numbers>

namespace eitlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPi = std::numbers::pi;

// CODATA Boltzmann constant, J/K.
inline constexpr double kBoltzmann = 1.380649e-23;

// Mass of an 87Rb atom, kg (86.909 u).
inline constexpr double kRb87MassKg = 1.443e-25;

// Lowest-order diffusion-mode constant in tau_D = kappa * w^2 / D.
// Calibrated once against the 5 Torr Ne anchor (w = 0.04 cm,
// D = 35.7 cm^2/s, 1/(pi tau_D) = 26 kHz) and frozen.
inline constexpr double kDiffusionModeKappa =
    35.7 / (kPi * 26.0e3 * 0.04 * 0.04);

inline constexpr double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline constexpr double rad_to_hz(double w_rad) { return w_rad / kTwoPi; }

inline constexpr const char* kToolName = "eitlab";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace eitlab
