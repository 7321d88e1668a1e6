#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "eitlab/config.hpp"

namespace eitlab {

// Dynamic-EIT storage: pulse delay and capture, dark evolution of the stored
// transverse coherence mode (diffusion + decay + gradient dephasing),
// drained retrieval, decay curves and the double-readout experiment.
//
// Longitudinal propagation is reduced to delay/fraction bookkeeping; the
// observables live in the transverse plane.

// Group delay C / P, calibrated once: 50 uW -> 450 us (delay ~ 1/|Omega_C|^2
// ~ 1/power).
double group_delay(double control_power_w);

struct StorageProtocol {
  double pulse_fwhm = 1e-3;         // Gaussian probe amplitude FWHM, s
  double write_power = 50e-6;       // W
  double read_power = 600e-6;       // W
  double storage_tau = 0.0;         // s, dark interval before the final read
  double read_duration = 800e-6;    // s, final control-on window
  bool intermediate_read = false;   // double-readout schedule
  double intermediate_off = 200e-6; // s
  double intermediate_on = 200e-6;  // s
  double gap = 0.0;                 // s, dark gap T after the intermediate read
  int grid_points = 512;            // transverse grid (per axis)
  double gradient = 0.0;            // G/cm during storage
};

struct ScheduleStep {
  bool control_on = false;
  double duration = 0.0;  // s
  double power = 0.0;     // W, meaningful when control_on
};

// Control schedule after the write stage; validates alternation and
// positive durations.
std::vector<ScheduleStep> schedule(const StorageProtocol& protocol);
void validate(const StorageProtocol& protocol);

// Stored spin-coherence mode on a transverse grid spanning the cell cross
// section, with a running loss ledger in input-pulse-norm units.
struct StoredCoherenceField {
  int n = 0;
  double h = 0.0;            // cm
  double cell_radius = 0.0;  // cm
  Eigen::ArrayXXcd amp;      // amp(ix, iy)
  double decay_loss = 0.0;   // gamma_bc losses
  double wall_loss = 0.0;    // absorbed at the cell wall / domain edge
  double mixing_loss = 0.0;  // coherence diluted by diffusion mixing

  double coord(int i) const { return -cell_radius + i * h; }
  double energy() const;         // sum |amp|^2 h^2
  double second_moment() const;  // energy-weighted <r^2>, cm^2
};

StoredCoherenceField make_field(int grid_points, double cell_radius);

struct DarkParams {
  double diffusion = 0.0;        // cm^2/s
  double gamma_bc = 0.0;         // rad/s
  double grad_rad_per_cm = 0.0;  // 2*pi*g*Gx

  static DarkParams from_config(const ExperimentConfig& config, double gradient_g_per_cm);
};

// Advances d(sigma)/dt = D lap(sigma) - (gamma_bc + i kx x) sigma by Strang
// splitting: exact pointwise decay/phase around a Peaceman-Rachford ADI
// diffusion step, absorbing boundary at the cell radius. Step size adapts to
// the current spot size; max_dt caps it (0 = automatic).
void evolve_dark(StoredCoherenceField& field, double duration,
                 const DarkParams& params, double max_dt = 0.0);

struct StoreResult {
  StoredCoherenceField field;
  double stored_fraction = 0.0;
  double transmitted_fraction = 0.0;
  double delay = 0.0;  // s
};

// Captures the in-medium part of the delayed pulse: stored fraction from
// delay-vs-width geometry, transverse profile = beam intensity mode.
StoreResult store_pulse(const StorageProtocol& protocol,
                        const ExperimentConfig& config);

struct RetrievalRecord {
  Eigen::VectorXd times;       // s, sample midpoints
  Eigen::VectorXd amplitudes;  // sqrt of retrieved power
  double area = 0.0;           // time-integral of amplitude
  double energy = 0.0;         // drained norm, input-pulse units
};

// Drains the in-beam coherence pointwise at rate (I(r)/I0)/tau_drain with
// tau_drain = group_delay(read_power), while dark dynamics (diffusion,
// decay) keep running; out-of-beam coherence is only reached by diffusion.
RetrievalRecord retrieve(StoredCoherenceField& field, double read_power,
                         double duration, const BeamConfig& beam,
                         const DarkParams& params);

struct DecayCurveResult {
  std::vector<double> taus;   // s
  std::vector<double> areas;  // amplitude-integral areas
  double time_constant = 0.0; // fitted 1/e time, s (inf when no decay)
  bool no_decay = false;
};

// store -> evolve(tau) -> retrieve per tau; least-squares exponential fit.
DecayCurveResult decay_curve(const StorageProtocol& protocol,
                             const std::vector<double>& taus,
                             const ExperimentConfig& config);

struct DoubleReadoutRow {
  double gap = 0.0;  // s (the variable T)
  double area_with = 0.0;
  double area_without = 0.0;
  double ratio = 0.0;
};

// Paired final-read areas with and without the intermediate read pulse.
std::vector<DoubleReadoutRow> double_readout(const StorageProtocol& protocol,
                                             const std::vector<double>& gaps,
                                             const ExperimentConfig& config);

}  // namespace eitlab
