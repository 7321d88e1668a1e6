#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eitlab/config.hpp"
#include "eitlab/rng.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

// Wall policy at the cell radius. An uncoated buffer-gas cell destroys the
// ground-state coherence on wall contact; the reflective policy keeps it
// (sensitivity studies).
enum class WallPolicy { Decohere, Reflect };

struct TrajectoryParams {
  double time_step = 0.0;     // s; 0 = derive w^2/(25 D) from the config
  double max_duration = 0.0;  // s; 0 = derive min(20/gamma_bc, 50 ms)
  WallPolicy boundary = WallPolicy::Decohere;
  std::uint64_t seed = 20060828;
};

void validate(const TrajectoryParams& params, const ExperimentConfig& config);
double default_time_step(const ExperimentConfig& config);
double default_max_duration(const ExperimentConfig& config);

// One transverse Brownian increment: independent Gaussian steps of variance
// 2 D dt per axis, with the wall handled by radial reflection. Returns true
// if the wall was hit (caller applies the decoherence policy).
bool step_brownian(Eigen::Vector2d& position, double diffusion, double dt,
                   double cell_radius, RngStream& rng);

// Rate model for the ground-state coherence along a trajectory:
//   dsigma/dt = -(R(I(r)) + gamma_bc + i (delta + grad_rad_per_cm * x)) sigma
//               + R(I(r))
// with R(I) = pump_rate * I(r)/I0.
struct CoherenceOde {
  double pump_rate = 0.0;         // R0 at beam center, rad/s
  double gamma_bc = 0.0;          // rad/s
  double waist_radius = 1.0;      // cm
  double grad_rad_per_cm = 0.0;   // 2*pi*g*Gx, rad/s per cm of x

  static CoherenceOde from_config(const ExperimentConfig& config);

  double pump_at(const Eigen::Vector2d& p) const {
    const double r2 = p.squaredNorm();
    const double w2 = waist_radius * waist_radius;
    return r2 > 6.125 * w2 ? 0.0 : pump_rate * std::exp(-2.0 * r2 / w2);
  }
  double dephasing_at(double x, double delta) const {
    return delta + grad_rad_per_cm * x;
  }
};

// Exact one-step update for piecewise-constant coefficients: solves the ODE
// over dt holding R and the dephasing at their start-of-step values.
std::complex<double> coherence_step(std::complex<double> sigma, double pump,
                                    double gamma_bc, double dephasing,
                                    double dt);

// Integrates sigma(0) = 0 along a pre-sampled trajectory (uniform dt),
// returning the full history. Test-grade; the spectrum synthesizer fuses
// stepping and integration instead of materializing trajectories.
std::vector<std::complex<double>> evolve_coherence(
    std::span<const Eigen::Vector2d> trajectory, double dt, double delta,
    const CoherenceOde& ode);

struct TrajectoryEnsembleResult {
  Eigen::VectorXd detunings;          // rad/s
  Eigen::VectorXcd mean_coherence;    // beam-weighted complex mean per delta
  Eigen::VectorXd std_error;          // per-delta standard error of Re part
  std::complex<double> reference;     // delta = 0, zero-gradient channel
  long trajectory_count = 0;
  std::vector<std::string> warnings;
};

struct McOptions {
  long n_trajectories = 10000;
  std::uint64_t seed = 20060828;
  int threads = 1;
  TrajectoryParams trajectory;  // seed field ignored (McOptions.seed wins)
};

// Beam-weighted steady-state ensemble average of the coherence over the
// detuning grid. Deterministic for fixed (config, grid, options.seed)
// regardless of thread count.
TrajectoryEnsembleResult run_ensemble(const ExperimentConfig& config,
                                      const Eigen::VectorXd& detunings,
                                      const McOptions& options);

// Full synthetic EIT lineshape: transmission = Re<sigma> normalized so the
// zero-gradient, delta = 0 channel maps to 1.
Spectrum synth_spectrum(const ExperimentConfig& config,
                        const Eigen::VectorXd& detunings,
                        const McOptions& options);

struct GradientScanEntry {
  double gradient = 0.0;  // G/cm
  Spectrum spectrum;
  std::vector<std::string> warnings;
};

// One spectrum per gradient value, same seed throughout so curves share
// trajectories and differ only through the dephasing term.
std::vector<GradientScanEntry> gradient_scan(const ExperimentConfig& config,
                                             const std::vector<double>& gradients_g_per_cm,
                                             const Eigen::VectorXd& detunings,
                                             const McOptions& options);

// Detuning grid with a dense core (resolving the narrow peak) and
// logarithmically spaced wings out to the pedestal scale. Symmetric, always
// contains delta = 0.
Eigen::VectorXd narrow_peak_grid_hz(double core_half_width_hz, int core_points,
                                    double wing_max_hz, int wing_points_per_side);

}  // namespace eitlab
