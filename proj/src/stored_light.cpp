#include "eitlab/stored_light.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "eitlab/units.hpp"

namespace eitlab {

namespace {

// 50 uW -> 450 us anchor.
constexpr double kGroupDelayCal = 450e-6 * 50e-6;  // W s

// Step-size control: dt = eta * <r^2>_E / D, i.e. the sharpest surviving
// feature advances a small fraction of its own diffusion time per step.
constexpr double kDtEta = 0.05;
constexpr double kDtCap = 20e-6;

using Array = Eigen::ArrayXXcd;

struct Tridiag {
  // Thomas forward coefficients for (1+2mu) on the diagonal, -mu off it.
  std::vector<double> cp;
  double mu = 0.0;

  void prepare(int n, double mu_in) {
    mu = mu_in;
    cp.assign(n, 0.0);
    const double b = 1.0 + 2.0 * mu;
    cp[0] = -mu / b;
    for (int i = 1; i < n; ++i) cp[i] = -mu / (b + mu * cp[i - 1]);
  }

  // Solves in place; rhs strided through `stride`.
  void solve(std::complex<double>* rhs, int n, int stride) const {
    const double b = 1.0 + 2.0 * mu;
    rhs[0] /= b;
    for (int i = 1; i < n; ++i) {
      rhs[i * stride] = (rhs[i * stride] + mu * rhs[(i - 1) * stride]) /
                        (b + mu * cp[i - 1]);
    }
    for (int i = n - 2; i >= 0; --i) {
      rhs[i * stride] -= cp[i] * rhs[(i + 1) * stride];
    }
  }
};

// One Peaceman-Rachford step: x-implicit/y-explicit then y-implicit/x-explicit,
// Dirichlet zero beyond the square domain.
void adi_step(Array& a, double mu, Tridiag& tri) {
  const int n = static_cast<int>(a.rows());
  tri.prepare(n, mu);
  Array rhs(n, n);

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::complex<double> ym = j > 0 ? a(i, j - 1) : 0.0;
      const std::complex<double> yp = j + 1 < n ? a(i, j + 1) : 0.0;
      rhs(i, j) = a(i, j) + mu * (yp - 2.0 * a(i, j) + ym);
    }
  }
  for (int j = 0; j < n; ++j) tri.solve(rhs.col(j).data(), n, 1);

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::complex<double> xm = i > 0 ? rhs(i - 1, j) : 0.0;
      const std::complex<double> xp = i + 1 < n ? rhs(i + 1, j) : 0.0;
      a(i, j) = rhs(i, j) + mu * (xp - 2.0 * rhs(i, j) + xm);
    }
  }
  for (int i = 0; i < n; ++i) tri.solve(a.data() + i, n, n);
}

}  // namespace

double group_delay(double control_power_w) {
  if (control_power_w <= 0) {
    throw std::domain_error("group_delay: control power must be > 0");
  }
  return kGroupDelayCal / control_power_w;
}

void validate(const StorageProtocol& p) {
  if (p.pulse_fwhm <= 0) throw ConfigError("protocol: pulse_fwhm must be > 0");
  if (p.write_power < 0) throw ConfigError("protocol: write_power must be >= 0");
  if (p.read_power <= 0) throw ConfigError("protocol: read_power must be > 0");
  if (p.storage_tau < 0) throw ConfigError("protocol: storage_tau must be >= 0");
  if (p.read_duration <= 0) throw ConfigError("protocol: read_duration must be > 0");
  if (p.intermediate_read) {
    if (p.intermediate_off <= 0 || p.intermediate_on <= 0 || p.gap < 0) {
      throw ConfigError("protocol: intermediate read intervals must be > 0");
    }
  }
  if (p.grid_points < 16) throw ConfigError("protocol: grid_points must be >= 16");
}

std::vector<ScheduleStep> schedule(const StorageProtocol& p) {
  validate(p);
  std::vector<ScheduleStep> steps;
  auto push = [&](bool on, double duration, double power) {
    if (duration <= 0) return;
    if (!steps.empty() && steps.back().control_on == on) {
      throw ConfigError("protocol schedule does not alternate on/off");
    }
    steps.push_back({on, duration, power});
  };
  if (p.intermediate_read) {
    push(false, p.intermediate_off, 0.0);
    push(true, p.intermediate_on, p.read_power);
    push(false, p.gap, 0.0);
  } else {
    push(false, p.storage_tau, 0.0);
  }
  push(true, p.read_duration, p.read_power);
  return steps;
}

double StoredCoherenceField::energy() const {
  return amp.abs2().sum() * h * h;
}

double StoredCoherenceField::second_moment() const {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = coord(j);
    for (int i = 0; i < n; ++i) {
      const double x = coord(i);
      const double e = std::norm(amp(i, j));
      num += (x * x + y * y) * e;
      den += e;
    }
  }
  return den > 0 ? num / den : 0.0;
}

StoredCoherenceField make_field(int grid_points, double cell_radius) {
  if (grid_points < 16) throw std::invalid_argument("field: grid too coarse");
  if (cell_radius <= 0) throw std::invalid_argument("field: cell radius must be > 0");
  StoredCoherenceField f;
  f.n = grid_points;
  f.cell_radius = cell_radius;
  f.h = 2.0 * cell_radius / (grid_points - 1);
  f.amp = Array::Zero(grid_points, grid_points);
  return f;
}

DarkParams DarkParams::from_config(const ExperimentConfig& config,
                                   double gradient_g_per_cm) {
  DarkParams p;
  p.diffusion = config.gas.diffusion_coefficient;
  p.gamma_bc = config.optics.gamma_bc;
  p.grad_rad_per_cm = kTwoPi * config.gas.gyromagnetic_ratio * gradient_g_per_cm;
  return p;
}

namespace {

void apply_mask(StoredCoherenceField& f) {
  double lost = 0.0;
  const double r2max = f.cell_radius * f.cell_radius;
  for (int j = 0; j < f.n; ++j) {
    const double y = f.coord(j);
    for (int i = 0; i < f.n; ++i) {
      const double x = f.coord(i);
      if (x * x + y * y > r2max) {
        lost += std::norm(f.amp(i, j));
        f.amp(i, j) = 0.0;
      }
    }
  }
  f.wall_loss += lost * f.h * f.h;
}

// Exact pointwise decay and gradient phase over dt; returns the decay loss.
void pointwise_step(StoredCoherenceField& f, const DarkParams& p, double dt) {
  const double g = std::exp(-p.gamma_bc * dt);
  if (p.grad_rad_per_cm != 0.0) {
    for (int i = 0; i < f.n; ++i) {
      const double angle = -p.grad_rad_per_cm * f.coord(i) * dt;
      const std::complex<double> factor = g * std::complex<double>(std::cos(angle), std::sin(angle));
      f.amp.row(i) *= factor;
    }
  } else if (g != 1.0) {
    f.amp *= g;
  }
  // |factor| = g everywhere, so the energy ledger is exact.
  if (g != 1.0) {
    const double energy_after = f.energy();
    f.decay_loss += energy_after * (1.0 / (g * g) - 1.0);
  }
}

}  // namespace

void evolve_dark(StoredCoherenceField& f, double duration, const DarkParams& p,
                 double max_dt) {
  if (duration < 0) throw std::domain_error("evolve_dark: duration must be >= 0");
  if (duration == 0.0) return;
  if (p.diffusion < 0) throw std::domain_error("evolve_dark: D must be >= 0");

  if (p.diffusion == 0.0) {
    pointwise_step(f, p, duration);
    apply_mask(f);
    return;
  }

  Tridiag tri;
  double remaining = duration;
  double m2 = std::max(f.second_moment(), f.h * f.h);
  const double cap = max_dt > 0 ? max_dt : kDtCap;
  while (remaining > 0.0) {
    double dt = std::min({kDtEta * m2 / p.diffusion, cap, remaining});
    dt = std::max(dt, std::min(remaining, 0.25 * f.h * f.h / p.diffusion));
    pointwise_step(f, p, 0.5 * dt);
    const double before = f.energy();
    adi_step(f.amp, p.diffusion * dt / (2.0 * f.h * f.h), tri);
    const double after = f.energy();
    f.mixing_loss += before - after;
    apply_mask(f);
    pointwise_step(f, p, 0.5 * dt);
    remaining -= dt;
    m2 += 4.0 * p.diffusion * dt;  // Gaussian growth law, good enough for dt control
  }
}

StoreResult store_pulse(const StorageProtocol& protocol,
                        const ExperimentConfig& config) {
  validate(protocol);
  validate(config);
  StoreResult out;
  out.field = make_field(protocol.grid_points, config.cell.radius);
  if (protocol.write_power <= 0) {
    out.stored_fraction = 0.0;
    out.transmitted_fraction = 1.0;
    return out;
  }
  out.delay = group_delay(protocol.write_power);

  // The medium holds a time window of width = group delay; switching off
  // around the pulse peak stores the pulse-energy mass inside that window.
  const double sigma_amp = protocol.pulse_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double sigma_energy = sigma_amp / std::sqrt(2.0);
  out.stored_fraction = std::erf(out.delay / (2.0 * std::sqrt(2.0) * sigma_energy));
  out.transmitted_fraction = 1.0 - out.stored_fraction;

  // Stored transverse profile = beam intensity mode, normalized on the grid.
  StoredCoherenceField& f = out.field;
  const double w = config.beam.waist_radius;
  for (int j = 0; j < f.n; ++j) {
    const double y = f.coord(j);
    for (int i = 0; i < f.n; ++i) {
      const double x = f.coord(i);
      f.amp(i, j) = std::exp(-2.0 * (x * x + y * y) / (w * w));
    }
  }
  apply_mask(f);
  f.wall_loss = 0.0;  // mode construction, not evolution
  const double e = f.energy();
  if (e <= 0) throw std::runtime_error("store_pulse: empty stored mode");
  f.amp *= std::sqrt(out.stored_fraction / e);
  return out;
}

RetrievalRecord retrieve(StoredCoherenceField& f, double read_power,
                         double duration, const BeamConfig& beam,
                         const DarkParams& p) {
  if (read_power <= 0) throw std::domain_error("retrieve: read power must be > 0");
  if (duration <= 0) throw std::domain_error("retrieve: duration must be > 0");

  const double tau_drain = group_delay(read_power);
  const double w = beam.waist_radius;
  const double w2 = w * w;

  // Resolve both the drain and the beam-scale hole it carves.
  double dt = std::min({tau_drain / 5.0, kDtEta * w2 / 2.0 /
                        std::max(p.diffusion, 1e-12), duration / 4.0, kDtCap});
  dt = std::max(dt, std::min(duration / 4.0, 0.25 * f.h * f.h /
                             std::max(p.diffusion, 1e-12)));
  const int steps = std::max(1, static_cast<int>(std::ceil(duration / dt)));
  dt = duration / steps;

  Tridiag tri;
  RetrievalRecord rec;
  rec.times.resize(steps);
  rec.amplitudes.resize(steps);

  std::vector<double> drain(f.n * f.n);
  for (int j = 0; j < f.n; ++j) {
    const double y = f.coord(j);
    for (int i = 0; i < f.n; ++i) {
      const double x = f.coord(i);
      const double irel = std::exp(-2.0 * (x * x + y * y) / w2);
      drain[j * f.n + i] = std::exp(-irel * dt / tau_drain);
    }
  }

  const double mu = p.diffusion * dt / (2.0 * f.h * f.h);
  for (int s = 0; s < steps; ++s) {
    pointwise_step(f, p, 0.5 * dt);
    if (p.diffusion > 0) {
      const double before = f.energy();
      adi_step(f.amp, mu, tri);
      f.mixing_loss += before - f.energy();
      apply_mask(f);
    }
    pointwise_step(f, p, 0.5 * dt);

    double drained = 0.0;
    for (int j = 0; j < f.n; ++j) {
      for (int i = 0; i < f.n; ++i) {
        const double d = drain[j * f.n + i];
        const double e0 = std::norm(f.amp(i, j));
        f.amp(i, j) *= d;
        drained += e0 * (1.0 - d * d);
      }
    }
    drained *= f.h * f.h;
    rec.energy += drained;
    rec.times[s] = (s + 0.5) * dt;
    rec.amplitudes[s] = std::sqrt(std::max(0.0, drained / dt));
    rec.area += rec.amplitudes[s] * dt;
  }
  return rec;
}

DecayCurveResult decay_curve(const StorageProtocol& protocol,
                             const std::vector<double>& taus,
                             const ExperimentConfig& config) {
  if (taus.empty()) throw std::invalid_argument("decay_curve: empty tau list");
  DecayCurveResult out;
  const DarkParams dark = DarkParams::from_config(config, protocol.gradient);
  for (const double tau : taus) {
    if (tau < 0) throw std::invalid_argument("decay_curve: tau must be >= 0");
    StoreResult stored = store_pulse(protocol, config);
    evolve_dark(stored.field, tau, dark);
    const RetrievalRecord rec = retrieve(stored.field, protocol.read_power,
                                         protocol.read_duration, config.beam, dark);
    out.taus.push_back(tau);
    out.areas.push_back(rec.area);
  }

  // Least squares on ln(area): slope -1/T.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(out.taus.size());
  for (int i = 0; i < n; ++i) {
    if (out.areas[i] <= 0) throw std::runtime_error("decay_curve: non-positive area");
    sx += out.taus[i];
    sy += std::log(out.areas[i]);
    sxx += out.taus[i] * out.taus[i];
    sxy += out.taus[i] * std::log(out.areas[i]);
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) {
    out.no_decay = true;
    out.time_constant = std::numeric_limits<double>::infinity();
    return out;
  }
  const double slope = (n * sxy - sx * sy) / denom;
  const double tau_span = out.taus.back() - out.taus.front();
  if (slope >= -1e-3 / std::max(tau_span, 1e-12)) {
    out.no_decay = true;
    out.time_constant = std::numeric_limits<double>::infinity();
  } else {
    out.time_constant = -1.0 / slope;
  }
  return out;
}

std::vector<DoubleReadoutRow> double_readout(const StorageProtocol& protocol,
                                             const std::vector<double>& gaps,
                                             const ExperimentConfig& config) {
  if (gaps.empty()) throw std::invalid_argument("double_readout: empty gap list");
  std::vector<DoubleReadoutRow> out;
  const DarkParams dark = DarkParams::from_config(config, protocol.gradient);
  for (const double gap : gaps) {
    if (gap < 0) throw std::invalid_argument("double_readout: gap must be >= 0");
    DoubleReadoutRow row;
    row.gap = gap;

    {  // with the intermediate read pulse
      StoreResult stored = store_pulse(protocol, config);
      evolve_dark(stored.field, protocol.intermediate_off, dark);
      retrieve(stored.field, protocol.read_power, protocol.intermediate_on,
               config.beam, dark);
      evolve_dark(stored.field, gap, dark);
      row.area_with = retrieve(stored.field, protocol.read_power,
                               protocol.read_duration, config.beam, dark).area;
    }
    {  // control stays off until the final read, same wall-clock timing
      StoreResult stored = store_pulse(protocol, config);
      evolve_dark(stored.field,
                  protocol.intermediate_off + protocol.intermediate_on + gap, dark);
      row.area_without = retrieve(stored.field, protocol.read_power,
                                  protocol.read_duration, config.beam, dark).area;
    }
    row.ratio = row.area_without > 0 ? row.area_with / row.area_without : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace eitlab
