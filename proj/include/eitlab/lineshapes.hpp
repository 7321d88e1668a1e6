#pragma once

#include <Eigen/Core>

#include "eitlab/config.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

// Closed-form EIT transmission models. All take the two-photon detuning as
// an angular frequency and return a dimensionless transmission in [0, 1].

// Three-level theory: 1 - (gamma_bc W^2 + d^2 g^2) / (W^4 + d^2 g^2).
double eval_lorentzian(double delta, double omega_c, double gamma,
                       double gamma_bc);

// Power-broadening average over a Gaussian beam:
// 1 - x*arctan(1/x), x = delta*gamma/omega_c^2 (x = 0 handled as the
// removable limit, value 1).
double eval_ty(double delta, double omega_c, double gamma);

// Low-pressure transit shape exp(-|delta * t_tr|).
double eval_transit_exponential(double delta, double transit_time_s);

// Average transit time through the beam, 2 r / <v>.
double transit_time(const BeamConfig& beam, const AtomGasParams& gas);

enum class LineshapeKind { Lorentzian, TY, TransitExponential };

// A fitting-grade model: T(delta) = baseline + amplitude * shape(delta).
// The raw shapes are proportionalities; amplitude and baseline map them
// onto detector units.
struct LineshapeModel {
  LineshapeKind kind = LineshapeKind::Lorentzian;
  double omega_c = 1.0;       // rad/s (Lorentzian, TY)
  double gamma = 1.0;         // rad/s (Lorentzian, TY)
  double gamma_bc = 0.0;      // rad/s (Lorentzian only)
  double transit_time = 1.0;  // s (TransitExponential only)
  double amplitude = 1.0;
  double baseline = 0.0;

  double shape(double delta) const;
  double eval(double delta) const { return baseline + amplitude * shape(delta); }
};

void validate(const LineshapeModel& model);

// Full width at half contrast (max-to-asymptote), angular rad/s, found by
// bisection to 1e-9 relative. The three shapes peak at delta = 0 and decay
// monotonically in |delta|; a non-monotone model is rejected.
double fwhm(const LineshapeModel& model);

// Samples the model over an angular detuning grid.
Spectrum sample(const LineshapeModel& model, const Eigen::VectorXd& detunings);

// Uniform angular grid from a cyclic [min_hz, max_hz] range.
Eigen::VectorXd uniform_grid_hz(double min_hz, double max_hz, int points);

}  // namespace eitlab
