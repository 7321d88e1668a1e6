#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "eitlab/lineshapes.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

// Least-squares fitting of spectra to the lineshape models.
//
// Each model is fitted in its minimal parametrization
//   T(delta) = baseline + amplitude * shape(delta; width)
// where width is the single shape parameter: the Lorentzian half width
// omega_c^2/gamma, the TY scale omega_c^2/gamma, or 1/t_tr. Eq.-style rate
// triples are degenerate under (amplitude, baseline), so the physical rates
// are recovered downstream when gamma is known.

struct FitParams {
  double amplitude = 1.0;
  double baseline = 0.0;
  double width = 1.0;  // rad/s (1/t_tr for the transit shape)
};

struct FitBounds {
  FitParams lo;
  FitParams hi;
};

struct FitResult {
  LineshapeKind kind = LineshapeKind::Lorentzian;
  FitParams params;
  FitParams std_errors;
  double rms = 0.0;
  Eigen::VectorXd residuals;
  bool converged = false;
  int iterations = 0;

  double fwhm_rad() const;  // of the fitted shape
  double fwhm_hz() const { return rad_to_hz(fwhm_rad()); }
  double normalized_rms() const {
    return params.amplitude > 0 ? rms / params.amplitude : rms;
  }
};

// Shape value for a given model kind and width parameter.
double fit_shape(LineshapeKind kind, double delta, double width);

// Data-driven initial guess and bounds (baseline from the wings, amplitude
// from the contrast, width from a coarse interpolated FWHM).
void auto_guess(const Spectrum& spectrum, LineshapeKind kind, FitParams& guess,
                FitBounds& bounds);

// Damped least squares with parameter bounds; converges on relative cost
// change < 1e-10 (500 iterations cap), then polishes with plain Gauss-Newton
// steps. A singular Jacobian flags non-convergence and returns the best
// point found.
FitResult fit(const Spectrum& spectrum, LineshapeKind kind,
              const FitParams& guess, const FitBounds& bounds);
FitResult fit(const Spectrum& spectrum, LineshapeKind kind);

// Fits all three models with automated guesses, best (lowest RMS) first.
std::vector<FitResult> compare_models(const Spectrum& spectrum);

struct CentralPeakResult {
  bool detected = false;
  double fwhm_hz = 0.0;
  double peak_height = 0.0;   // residual excess over the pedestal
  FitResult pedestal;         // TY fit with the peak region excluded
  std::string note;
};

// Width of the sharp central excess over the broad pedestal: TY-fit the
// pedestal (excluding the peak region), then measure the half-maximum
// crossings of the residual by interpolation.
CentralPeakResult central_peak_width(const Spectrum& spectrum);

std::string kind_name(LineshapeKind kind);

}  // namespace eitlab
