#include "eitlab/lineshapes.hpp"

#include <cmath>
#include <stdexcept>

namespace eitlab {

double eval_lorentzian(double delta, double omega_c, double gamma,
                       double gamma_bc) {
  if (omega_c <= 0) throw std::domain_error("eval_lorentzian: omega_c must be > 0");
  if (gamma <= 0) throw std::domain_error("eval_lorentzian: gamma must be > 0");
  if (gamma_bc < 0) throw std::domain_error("eval_lorentzian: gamma_bc must be >= 0");
  const double w2 = omega_c * omega_c;
  const double dg = delta * gamma;
  const double denom = w2 * w2 + dg * dg;
  if (denom == 0.0) throw std::domain_error("eval_lorentzian: degenerate denominator");
  return 1.0 - (gamma_bc * w2 + dg * dg) / denom;
}

double eval_ty(double delta, double omega_c, double gamma) {
  if (omega_c <= 0) throw std::domain_error("eval_ty: omega_c must be > 0");
  if (gamma <= 0) throw std::domain_error("eval_ty: gamma must be > 0");
  const double x = delta * gamma / (omega_c * omega_c);
  if (x == 0.0) return 1.0;  // removable singularity: x*arctan(1/x) -> 0
  return 1.0 - x * std::atan(1.0 / x);
}

double eval_transit_exponential(double delta, double transit_time_s) {
  if (transit_time_s <= 0)
    throw std::domain_error("eval_transit_exponential: t_tr must be > 0");
  return std::exp(-std::abs(delta * transit_time_s));
}

double transit_time(const BeamConfig& beam, const AtomGasParams& gas) {
  const double v = mean_thermal_speed(gas.atomic_mass, gas.cell_temperature);
  return 2.0 * beam.waist_radius / v;
}

double LineshapeModel::shape(double delta) const {
  switch (kind) {
    case LineshapeKind::Lorentzian:
      return eval_lorentzian(delta, omega_c, gamma, gamma_bc);
    case LineshapeKind::TY:
      return eval_ty(delta, omega_c, gamma);
    case LineshapeKind::TransitExponential:
      return eval_transit_exponential(delta, transit_time);
  }
  return 0.0;
}

void validate(const LineshapeModel& m) {
  if (m.amplitude <= 0) throw std::domain_error("lineshape model: amplitude must be > 0");
  switch (m.kind) {
    case LineshapeKind::Lorentzian:
      if (m.omega_c <= 0 || m.gamma <= 0 || m.gamma_bc < 0)
        throw std::domain_error("lineshape model: bad Lorentzian rates");
      break;
    case LineshapeKind::TY:
      if (m.omega_c <= 0 || m.gamma <= 0)
        throw std::domain_error("lineshape model: bad TY rates");
      break;
    case LineshapeKind::TransitExponential:
      if (m.transit_time <= 0)
        throw std::domain_error("lineshape model: t_tr must be > 0");
      break;
  }
}

double fwhm(const LineshapeModel& m) {
  validate(m);
  // All three shapes decay to 0; width is measured on contrast.
  const double top = m.shape(0.0);
  const double target = 0.5 * top;

  // Bracket the half-contrast crossing, checking monotone decay as we go.
  double lo = 0.0;
  double hi = m.omega_c * m.omega_c / m.gamma;
  if (m.kind == LineshapeKind::TransitExponential) hi = 1.0 / m.transit_time;
  double prev = top;
  for (int i = 0; i < 200 && m.shape(hi) > target; ++i) {
    const double value = m.shape(hi);
    if (value > prev + 1e-12 * top) {
      throw std::runtime_error("fwhm: model is not monotone in |delta|");
    }
    prev = value;
    lo = hi;
    hi *= 2.0;
  }
  if (m.shape(hi) > target) throw std::runtime_error("fwhm: no half-contrast crossing");

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (m.shape(mid) > target ? lo : hi) = mid;
    if (hi - lo <= 1e-9 * hi) break;
  }
  return 2.0 * 0.5 * (lo + hi);
}

Spectrum sample(const LineshapeModel& m, const Eigen::VectorXd& detunings) {
  validate(m);
  Spectrum s;
  s.source = Spectrum::Source::ClosedForm;
  s.detunings = detunings;
  s.transmissions.resize(detunings.size());
  for (Eigen::Index i = 0; i < detunings.size(); ++i) {
    s.transmissions[i] = m.eval(detunings[i]);
  }
  validate(s);
  return s;
}

Eigen::VectorXd uniform_grid_hz(double min_hz, double max_hz, int points) {
  if (points < 2 || max_hz <= min_hz) {
    throw std::invalid_argument("grid: need points >= 2 and max > min");
  }
  Eigen::VectorXd grid(points);
  for (int i = 0; i < points; ++i) {
    const double f = min_hz + (max_hz - min_hz) * i / (points - 1);
    grid[i] = hz_to_rad(f);
  }
  return grid;
}

}  // namespace eitlab
