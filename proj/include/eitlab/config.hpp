#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitlab/units.hpp"

namespace eitlab {

// Thrown when a configuration violates a documented invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AtomGasParams {
  double diffusion_coefficient = 35.7;  // cm^2/s
  double atomic_mass = kRb87MassKg;     // kg
  double cell_temperature = 318.15;     // K
  double gyromagnetic_ratio = 1.4e6;    // Hz/G
};

struct CellGeometry {
  double length = 7.0;   // cm
  double radius = 1.25;  // cm; typical 1-inch cell, the papers of this kind
                         // care only about the ratio to the beam waist
};

struct BeamConfig {
  // Gaussian 1/e^2 intensity radius. The "0.8 mm diameter spot" is read as
  // the 1/e^2 intensity diameter, so the default is 0.04 cm.
  double waist_radius = 0.04;  // cm
  double total_power = 50e-6;  // W

  // Relative intensity profile I(r)/I0.
  double relative_intensity(double r_cm) const {
    const double x = r_cm / waist_radius;
    return std::exp(-2.0 * x * x);
  }
};

struct OpticalParams {
  double omega_c = 4.66e6;       // control Rabi frequency, rad/s
  double omega_p = 2.3e5;        // probe Rabi frequency, rad/s
  double gamma = 3.46e8;         // excited-state relaxation, rad/s
  double gamma_bc = 314.159265;  // ground-state coherence relaxation, rad/s
  double delta = 0.0;            // two-photon detuning, rad/s

  // Optical pumping rate at beam center implied by the power-broadened
  // EIT width 2*omega_c^2/gamma.
  double pump_rate() const { return omega_c * omega_c / gamma; }
};

// Weak-probe assumption: warn (not fail) above this ratio.
inline constexpr double kWeakProbeWarnRatio = 0.2;

struct MagneticConfig {
  double b0 = 0.08;        // longitudinal bias, G
  double gradient = 0.0;   // dBz/dx, G/cm

  // Curl consistency dBx/dz = dBz/dx holds by construction: the transverse
  // term is derived, never stored separately.
  double transverse_gradient() const { return gradient; }
};

struct ExperimentConfig {
  AtomGasParams gas;
  CellGeometry cell;
  BeamConfig beam;
  OpticalParams optics;
  MagneticConfig magnetics;

  // Zeeman detuning shift (rad/s) at transverse offset x for this gradient.
  double zeeman_shift_rad(double x_cm) const {
    return kTwoPi * gas.gyromagnetic_ratio * magnetics.gradient * x_cm;
  }
};

// Validates every type invariant; throws ConfigError naming the field.
// Returns human-readable warnings (weak-probe ratio and the like).
std::vector<std::string> validate(const ExperimentConfig& config);

// Presets: "ne5torr", "ne100torr", "storage".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Strict JSON I/O: sections gas/cell/beam/optics/magnetics, unknown keys
// rejected with the offending key named. parse(emit(c)) == c exactly.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Scales the control power by `factor` (Rabi frequency by sqrt(factor)).
ExperimentConfig with_power_scaled(ExperimentConfig config, double factor);

// Mean thermal speed sqrt(8 kB T / (pi m)) in cm/s.
double mean_thermal_speed(double mass_kg, double temperature_k);

// Naive single-pass diffusion linewidth 1/(pi tau_D) in Hz, with
// tau_D = kappa w^2 / D (kappa frozen against the 5 Torr anchor).
double single_pass_diffusion_linewidth(const ExperimentConfig& config);

}  // namespace eitlab
