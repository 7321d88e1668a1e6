#include "eitlab/diffusion_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "eitlab/coil.hpp"

namespace eitlab {

namespace {

using Complex = std::complex<double>;

inline Complex cis(double angle) { return {std::cos(angle), std::sin(angle)}; }

constexpr double kPumpCutoffR2OverW2 = 6.125;  // I/I0 < 5e-6 beyond this
constexpr long kChunkSize = 64;

}  // namespace

double default_time_step(const ExperimentConfig& config) {
  const double w = config.beam.waist_radius;
  return w * w / (25.0 * config.gas.diffusion_coefficient);
}

double default_max_duration(const ExperimentConfig& config) {
  const double gbc = config.optics.gamma_bc;
  const double cap = 50e-3;
  return gbc > 0 ? std::min(20.0 / gbc, cap) : cap;
}

void validate(const TrajectoryParams& params, const ExperimentConfig& config) {
  const double dt = params.time_step > 0 ? params.time_step : default_time_step(config);
  if (dt <= 0) throw ConfigError("trajectory.time_step must be > 0");
  if (dt > default_time_step(config) * (1.0 + 1e-12)) {
    throw ConfigError("trajectory.time_step must be <= w^2/(25 D)");
  }
  const double dur = params.max_duration > 0 ? params.max_duration
                                             : default_max_duration(config);
  if (dur <= 0) throw ConfigError("trajectory.max_duration must be > 0");
}

bool step_brownian(Eigen::Vector2d& position, double diffusion, double dt,
                   double cell_radius, RngStream& rng) {
  if (dt <= 0) throw std::domain_error("step_brownian: dt must be > 0");
  const double s = std::sqrt(2.0 * diffusion * dt);
  position.x() += s * rng.gaussian();
  position.y() += s * rng.gaussian();
  bool hit = false;
  for (int i = 0; i < 4 && position.norm() > cell_radius; ++i) {
    hit = true;
    const double r = position.norm();
    position *= (2.0 * cell_radius - r) / r;  // radial mirror at the wall
  }
  if (position.norm() > cell_radius) {
    hit = true;
    position *= 0.999999 * cell_radius / position.norm();
  }
  return hit;
}

CoherenceOde CoherenceOde::from_config(const ExperimentConfig& config) {
  CoherenceOde ode;
  ode.pump_rate = config.optics.pump_rate();
  ode.gamma_bc = config.optics.gamma_bc;
  ode.waist_radius = config.beam.waist_radius;
  ode.grad_rad_per_cm = kTwoPi * config.gas.gyromagnetic_ratio *
                        config.magnetics.gradient;
  return ode;
}

Complex coherence_step(Complex sigma, double pump, double gamma_bc,
                       double dephasing, double dt) {
  const Complex a(pump + gamma_bc, dephasing);
  if (a == Complex(0.0, 0.0)) return sigma;  // free evolution, no drive
  const Complex e = std::exp(-a * dt);
  if (pump == 0.0) return sigma * e;
  const Complex fixed_point = pump / a;
  return fixed_point + (sigma - fixed_point) * e;
}

std::vector<Complex> evolve_coherence(std::span<const Eigen::Vector2d> trajectory,
                                      double dt, double delta,
                                      const CoherenceOde& ode) {
  if (dt <= 0) throw std::domain_error("evolve_coherence: dt must be > 0");
  std::vector<Complex> history;
  history.reserve(trajectory.size());
  Complex sigma = 0.0;
  for (const Eigen::Vector2d& p : trajectory) {
    const double pump = ode.pump_at(p);
    const double dephasing = ode.dephasing_at(p.x(), delta);
    sigma = coherence_step(sigma, pump, ode.gamma_bc, dephasing, dt);
    history.push_back(sigma);
  }
  return history;
}

namespace {

struct ChunkAccumulator {
  Eigen::VectorXcd signal;   // per channel
  double signal_ref = 0.0;   // zero-detuning, zero-gradient channel (real ODE)
  double weight = 0.0;
};

struct EngineSetup {
  Eigen::VectorXd delta;          // rad/s per channel
  std::vector<Complex> step_phase;  // cis(-delta dt_fine) per channel
  CoherenceOde ode;
  double dt_fine;
  double max_duration;
  double burn_in;
  double cell_radius;
  double diffusion;
  double r_in, r_out;         // fine-zone hysteresis radii
  double r2_cut;              // pump cutoff (cm^2)
  double dark_dt_max;
  WallPolicy boundary;
  std::uint64_t seed;
};

void run_trajectory(const EngineSetup& es, long index, ChunkAccumulator& acc) {
  RngStream rng(es.seed, static_cast<std::uint64_t>(index));
  const int nch = static_cast<int>(es.delta.size());
  const double w2 = es.ode.waist_radius * es.ode.waist_radius;
  const double r0 = es.ode.pump_rate;
  const double gbc = es.ode.gamma_bc;
  const double kx = es.ode.grad_rad_per_cm;

  Eigen::Vector2d pos;
  {
    const double r = es.cell_radius * std::sqrt(rng.uniform01());
    const double a = kTwoPi * rng.uniform01();
    pos = {r * std::cos(a), r * std::sin(a)};
  }

  std::vector<Complex> sigma(nch, Complex(0.0, 0.0));
  double sigma_ref = 0.0;
  bool fine = pos.norm() <= es.r_out;
  double dark_t = 0.0, dark_x = 0.0;
  double t = 0.0;

  while (t < es.max_duration) {
    if (fine) {
      const double dt = std::min(es.dt_fine, es.max_duration - t);
      const bool nominal_dt = dt == es.dt_fine;
      const double r2 = pos.squaredNorm();
      const double irel = r2 > es.r2_cut * w2 ? 0.0 : std::exp(-2.0 * r2 / w2);
      const double pump = r0 * irel;
      const double u = std::exp(-(pump + gbc) * dt);
      const Complex uv = kx != 0.0 ? u * cis(-kx * pos.x() * dt) : Complex(u, 0.0);
      if (pump > 0.0) {
        for (int c = 0; c < nch; ++c) {
          const Complex e = nominal_dt ? uv * es.step_phase[c]
                                       : uv * cis(-es.delta[c] * dt);
          const Complex a(pump + gbc, es.delta[c] + kx * pos.x());
          const Complex fp = pump / a;
          sigma[c] = fp + (sigma[c] - fp) * e;
        }
        const double fp_ref = pump / (pump + gbc);
        sigma_ref = fp_ref + (sigma_ref - fp_ref) * u;
      } else {
        for (int c = 0; c < nch; ++c) {
          const Complex e = nominal_dt ? uv * es.step_phase[c]
                                       : uv * cis(-es.delta[c] * dt);
          sigma[c] *= e;
        }
        sigma_ref *= u;
      }
      if (t >= es.burn_in && irel > 0.0) {
        acc.weight += irel * dt;
        for (int c = 0; c < nch; ++c) acc.signal[c] += irel * dt * sigma[c];
        acc.signal_ref += irel * dt * sigma_ref;
      }
      const bool hit = step_brownian(pos, es.diffusion, dt, es.cell_radius, rng);
      if (hit && es.boundary == WallPolicy::Decohere) {
        std::fill(sigma.begin(), sigma.end(), Complex(0.0, 0.0));
        sigma_ref = 0.0;
      }
      t += dt;
      if (pos.norm() > es.r_out) {
        fine = false;
        dark_t = dark_x = 0.0;
      }
    } else {
      const double r = pos.norm();
      const double margin = std::min(r - es.r_in, es.cell_radius - r);
      const double s_min = std::sqrt(2.0 * es.diffusion * es.dt_fine);
      const double s = std::max(margin / 4.0, s_min);
      double dt = s * s / (2.0 * es.diffusion);
      if (kx != 0.0) {
        dt = std::min(dt, 0.25 / (std::abs(kx) * (std::abs(pos.x()) + s) + 1e-300));
      }
      dt = std::min(dt, es.dark_dt_max);
      dt = std::max(dt, es.dt_fine);
      dt = std::min(dt, es.max_duration - t);

      // Coherence updates are deferred: free evolution only needs the total
      // dark time and the path integral of x for the gradient phase.
      dark_t += dt;
      dark_x += pos.x() * dt;
      const bool hit = step_brownian(pos, es.diffusion, dt, es.cell_radius, rng);
      if (hit && es.boundary == WallPolicy::Decohere) {
        std::fill(sigma.begin(), sigma.end(), Complex(0.0, 0.0));
        sigma_ref = 0.0;
        dark_t = dark_x = 0.0;
      }
      t += dt;
      if (pos.norm() <= es.r_in) {
        const double u = std::exp(-gbc * dark_t);
        for (int c = 0; c < nch; ++c) {
          sigma[c] *= u * cis(-(es.delta[c] * dark_t + kx * dark_x));
        }
        sigma_ref *= u;
        dark_t = dark_x = 0.0;
        fine = true;
      }
    }
  }
}

}  // namespace

TrajectoryEnsembleResult run_ensemble(const ExperimentConfig& config,
                                      const Eigen::VectorXd& detunings,
                                      const McOptions& options) {
  validate(config);
  validate(options.trajectory, config);
  if (detunings.size() == 0) throw std::invalid_argument("empty detuning grid");
  for (Eigen::Index i = 1; i < detunings.size(); ++i) {
    if (detunings[i] <= detunings[i - 1]) {
      throw std::invalid_argument("detuning grid must be strictly increasing");
    }
  }
  if (options.n_trajectories < 1) throw std::invalid_argument("need n_trajectories >= 1");

  EngineSetup es;
  es.delta = detunings;
  es.ode = CoherenceOde::from_config(config);
  es.dt_fine = options.trajectory.time_step > 0 ? options.trajectory.time_step
                                                : default_time_step(config);
  es.max_duration = options.trajectory.max_duration > 0
                        ? options.trajectory.max_duration
                        : default_max_duration(config);
  es.burn_in = es.ode.pump_rate > 0 ? 5.0 / es.ode.pump_rate : 0.0;
  es.cell_radius = config.cell.radius;
  es.diffusion = config.gas.diffusion_coefficient;
  const double w = config.beam.waist_radius;
  es.r_in = std::min(4.0 * w, 0.75 * es.cell_radius);
  es.r_out = std::min(6.0 * w, 0.9 * es.cell_radius);
  if (es.r_out < es.r_in) es.r_out = es.r_in;
  es.r2_cut = kPumpCutoffR2OverW2;
  es.dark_dt_max = es.max_duration / 128.0;
  es.boundary = options.trajectory.boundary;
  es.seed = options.seed;
  es.step_phase.resize(detunings.size());
  for (Eigen::Index c = 0; c < detunings.size(); ++c) {
    es.step_phase[c] = cis(-detunings[c] * es.dt_fine);
  }

  const long n = options.n_trajectories;
  const long nchunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkAccumulator> chunks(nchunks);

  std::atomic<long> next_chunk{0};
  auto worker = [&]() {
    for (;;) {
      const long k = next_chunk.fetch_add(1);
      if (k >= nchunks) break;
      ChunkAccumulator acc;
      acc.signal = Eigen::VectorXcd::Zero(detunings.size());
      const long begin = k * kChunkSize;
      const long end = std::min(n, begin + kChunkSize);
      for (long i = begin; i < end; ++i) run_trajectory(es, i, acc);
      chunks[k] = std::move(acc);
    }
  };

  const int nthreads = std::max(1, options.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // In-order reduction over chunk index keeps results bit-identical for any
  // worker count.
  Eigen::VectorXcd total = Eigen::VectorXcd::Zero(detunings.size());
  double total_ref = 0.0, total_weight = 0.0;
  for (const ChunkAccumulator& c : chunks) {
    total += c.signal;
    total_ref += c.signal_ref;
    total_weight += c.weight;
  }
  if (total_weight <= 0.0) {
    throw std::runtime_error("ensemble never sampled the beam; increase N or duration");
  }

  TrajectoryEnsembleResult out;
  out.detunings = detunings;
  out.mean_coherence = total / total_weight;
  out.reference = Complex(total_ref / total_weight, 0.0);
  out.trajectory_count = n;

  out.std_error = Eigen::VectorXd::Zero(detunings.size());
  if (nchunks > 1) {
    for (Eigen::Index c = 0; c < detunings.size(); ++c) {
      double ss = 0.0;
      const double m = out.mean_coherence[c].real();
      for (const ChunkAccumulator& ch : chunks) {
        const double d = ch.signal[c].real() - m * ch.weight;
        ss += d * d;
      }
      out.std_error[c] = std::sqrt(ss * nchunks / (nchunks - 1.0)) / total_weight;
    }
  }

  const double expected_peak_hz = std::max(config.optics.gamma_bc / kPi, 30.0);
  double min_core_spacing_hz = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < detunings.size(); ++i) {
    const double mid = 0.5 * std::abs(detunings[i] + detunings[i - 1]);
    if (rad_to_hz(mid) <= 2.0 * expected_peak_hz) {
      min_core_spacing_hz = std::min(
          min_core_spacing_hz, rad_to_hz(detunings[i] - detunings[i - 1]));
    }
  }
  if (min_core_spacing_hz > expected_peak_hz / 5.0) {
    std::ostringstream os;
    os << "grid may undersample the narrow peak: spacing "
       << min_core_spacing_hz << " Hz vs expected width " << expected_peak_hz
       << " Hz";
    out.warnings.push_back(os.str());
  }
  return out;
}

Spectrum synth_spectrum(const ExperimentConfig& config,
                        const Eigen::VectorXd& detunings,
                        const McOptions& options) {
  const TrajectoryEnsembleResult r = run_ensemble(config, detunings, options);
  if (r.reference.real() <= 0.0) {
    throw std::runtime_error("zero-detuning reference vanished; cannot normalize");
  }
  Spectrum s;
  s.source = Spectrum::Source::MonteCarlo;
  s.detunings = detunings;
  s.transmissions.resize(detunings.size());
  s.std_errors.resize(detunings.size());
  const double ref = r.reference.real();
  for (Eigen::Index i = 0; i < detunings.size(); ++i) {
    s.transmissions[i] = std::clamp(r.mean_coherence[i].real() / ref, 0.0,
                                    1.0 + kTransmissionEps);
    s.std_errors[i] = r.std_error[i] / ref;
  }
  validate(s);
  return s;
}

std::vector<GradientScanEntry> gradient_scan(const ExperimentConfig& config,
                                             const std::vector<double>& gradients_g_per_cm,
                                             const Eigen::VectorXd& detunings,
                                             const McOptions& options) {
  std::vector<GradientScanEntry> out;
  out.reserve(gradients_g_per_cm.size());
  for (const double g : gradients_g_per_cm) {
    ExperimentConfig c = config;
    c.magnetics.gradient = g;
    GradientScanEntry entry;
    entry.gradient = g;
    const DistortionCheck check =
        distortion_check(g, c.cell.length, c.magnetics.b0);
    if (check.status != DistortionStatus::Pass) {
      std::ostringstream os;
      os << "transverse-field distortion constraint "
         << (check.status == DistortionStatus::Fail ? "violated" : "marginal")
         << " at gradient " << g * 1e3 << " mG/cm (ratio " << check.ratio << ")";
      entry.warnings.push_back(os.str());
    }
    entry.spectrum = synth_spectrum(c, detunings, options);
    out.push_back(std::move(entry));
  }
  return out;
}

Eigen::VectorXd narrow_peak_grid_hz(double core_half_width_hz, int core_points,
                                    double wing_max_hz, int wing_points_per_side) {
  if (core_half_width_hz <= 0 || wing_max_hz <= core_half_width_hz) {
    throw std::invalid_argument("narrow_peak_grid_hz: need 0 < core < wing_max");
  }
  if (core_points < 3 || wing_points_per_side < 1) {
    throw std::invalid_argument("narrow_peak_grid_hz: too few points");
  }
  if (core_points % 2 == 0) ++core_points;  // keep delta = 0 on the grid

  std::vector<double> hz;
  const double log_lo = std::log(core_half_width_hz);
  const double log_hi = std::log(wing_max_hz);
  for (int i = wing_points_per_side; i >= 1; --i) {
    hz.push_back(-std::exp(log_lo + (log_hi - log_lo) * i / wing_points_per_side));
  }
  for (int i = 0; i < core_points; ++i) {
    hz.push_back(-core_half_width_hz +
                 2.0 * core_half_width_hz * i / (core_points - 1));
  }
  for (int i = 1; i <= wing_points_per_side; ++i) {
    hz.push_back(std::exp(log_lo + (log_hi - log_lo) * i / wing_points_per_side));
  }
  std::sort(hz.begin(), hz.end());
  Eigen::VectorXd grid(hz.size());
  Eigen::Index n = 0;
  for (const double f : hz) {
    const double w = hz_to_rad(f);
    if (n > 0 && w - grid[n - 1] < 1e-9 * std::max(1.0, std::abs(w))) continue;
    grid[n++] = w;
  }
  return grid.head(n).eval();
}

}  // namespace eitlab
