#include "eitlab/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eitlab {

namespace {

// Solves x * arctan(1/x) = 1/2; the TY FWHM is 2 * x * (omega_c^2/gamma).
double ty_half_factor() {
  static const double value = [] {
    double lo = 0.1, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mid * std::atan(1.0 / mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return value;
}

double shape_derivative(LineshapeKind kind, double delta, double width) {
  switch (kind) {
    case LineshapeKind::Lorentzian: {
      const double d2 = delta * delta;
      const double w2 = width * width;
      const double den = w2 + d2;
      return 2.0 * width * d2 / (den * den);
    }
    case LineshapeKind::TY: {
      const double x = delta / width;
      if (x == 0.0) return 0.0;
      return (std::atan(1.0 / x) - x / (1.0 + x * x)) * x / width;
    }
    case LineshapeKind::TransitExponential: {
      // width = 1/t_tr; shape = exp(-|delta|/width)
      const double f = std::exp(-std::abs(delta) / width);
      return f * std::abs(delta) / (width * width);
    }
  }
  return 0.0;
}

struct Problem {
  const Spectrum& spectrum;
  LineshapeKind kind;

  double cost(const FitParams& p) const {
    double c = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      const double m = p.baseline +
                       p.amplitude * fit_shape(kind, spectrum.detunings[i], p.width);
      const double r = spectrum.transmissions[i] - m;
      c += r * r;
    }
    return c;
  }

  void jacobian(const FitParams& p, Eigen::MatrixXd& jac, Eigen::VectorXd& res) const {
    const Eigen::Index n = spectrum.size();
    jac.resize(n, 3);
    res.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double delta = spectrum.detunings[i];
      const double f = fit_shape(kind, delta, p.width);
      jac(i, 0) = f;
      jac(i, 1) = 1.0;
      jac(i, 2) = p.amplitude * shape_derivative(kind, delta, p.width);
      res[i] = spectrum.transmissions[i] - (p.baseline + p.amplitude * f);
    }
  }
};

FitParams clamp_params(FitParams p, const FitBounds& b) {
  p.amplitude = std::clamp(p.amplitude, b.lo.amplitude, b.hi.amplitude);
  p.baseline = std::clamp(p.baseline, b.lo.baseline, b.hi.baseline);
  p.width = std::clamp(p.width, b.lo.width, b.hi.width);
  return p;
}

bool inside(const FitParams& p, const FitBounds& b) {
  return p.amplitude >= b.lo.amplitude && p.amplitude <= b.hi.amplitude &&
         p.baseline >= b.lo.baseline && p.baseline <= b.hi.baseline &&
         p.width >= b.lo.width && p.width <= b.hi.width;
}

FitParams apply_step(const FitParams& p, const Eigen::Vector3d& h) {
  FitParams q = p;
  q.amplitude += h[0];
  q.baseline += h[1];
  q.width += h[2];
  return q;
}

// Coarse full width from interpolated half-contrast crossings.
double coarse_fwhm(const Spectrum& s, double baseline, double peak) {
  const double half = baseline + 0.5 * (peak - baseline);
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < s.size(); ++i) {
    if (s.transmissions[i] > s.transmissions[top]) top = i;
  }
  double left = s.detunings[0], right = s.detunings[s.size() - 1];
  for (Eigen::Index i = top; i > 0; --i) {
    if (s.transmissions[i - 1] <= half) {
      const double t0 = s.transmissions[i - 1], t1 = s.transmissions[i];
      const double u = (half - t0) / (t1 - t0);
      left = s.detunings[i - 1] + u * (s.detunings[i] - s.detunings[i - 1]);
      break;
    }
  }
  for (Eigen::Index i = top; i + 1 < s.size(); ++i) {
    if (s.transmissions[i + 1] <= half) {
      const double t0 = s.transmissions[i], t1 = s.transmissions[i + 1];
      const double u = (t0 - half) / (t0 - t1);
      right = s.detunings[i] + u * (s.detunings[i + 1] - s.detunings[i]);
      break;
    }
  }
  return std::max(right - left, s.detunings[1] - s.detunings[0]);
}

}  // namespace

double fit_shape(LineshapeKind kind, double delta, double width) {
  switch (kind) {
    case LineshapeKind::Lorentzian: {
      const double w2 = width * width;
      return w2 / (w2 + delta * delta);
    }
    case LineshapeKind::TY: {
      const double x = delta / width;
      if (x == 0.0) return 1.0;
      return 1.0 - x * std::atan(1.0 / x);
    }
    case LineshapeKind::TransitExponential:
      return std::exp(-std::abs(delta) / width);
  }
  return 0.0;
}

double FitResult::fwhm_rad() const {
  switch (kind) {
    case LineshapeKind::Lorentzian: return 2.0 * params.width;
    case LineshapeKind::TY: return 2.0 * ty_half_factor() * params.width;
    case LineshapeKind::TransitExponential: return 2.0 * std::log(2.0) * params.width;
  }
  return 0.0;
}

void auto_guess(const Spectrum& s, LineshapeKind kind, FitParams& guess,
                FitBounds& bounds) {
  validate(s);
  if (s.size() < 9) throw std::invalid_argument("fit: need at least 9 samples");

  const Eigen::Index n = s.size();
  const Eigen::Index wing = std::max<Eigen::Index>(2, n / 10);
  double base = 0.0;
  for (Eigen::Index i = 0; i < wing; ++i) {
    base += s.transmissions[i] + s.transmissions[n - 1 - i];
  }
  base /= 2.0 * wing;
  const double peak = s.transmissions.maxCoeff();
  const double contrast = std::max(peak - base, 1e-6 * std::max(peak, 1.0));
  const double width_rad = coarse_fwhm(s, base, peak);

  guess.amplitude = contrast;
  guess.baseline = base;
  switch (kind) {
    case LineshapeKind::Lorentzian: guess.width = 0.5 * width_rad; break;
    case LineshapeKind::TY: guess.width = width_rad / (2.0 * ty_half_factor()); break;
    case LineshapeKind::TransitExponential:
      guess.width = width_rad / (2.0 * std::log(2.0));
      break;
  }

  const double span = s.detunings[n - 1] - s.detunings[0];
  const double min_spacing = (s.detunings.tail(n - 1) - s.detunings.head(n - 1)).minCoeff();
  bounds.lo.amplitude = 1e-6 * contrast;
  bounds.hi.amplitude = 50.0 * contrast;
  bounds.lo.baseline = base - 10.0 * contrast;
  bounds.hi.baseline = base + 10.0 * contrast;
  bounds.lo.width = 0.1 * min_spacing;
  bounds.hi.width = 100.0 * span;
}

FitResult fit(const Spectrum& s, LineshapeKind kind, const FitParams& guess,
              const FitBounds& bounds) {
  validate(s);
  if (s.size() < 9) throw std::invalid_argument("fit: need at least 9 samples");
  if (!inside(guess, bounds)) throw std::invalid_argument("fit: guess outside bounds");

  Problem prob{s, kind};
  FitResult out;
  out.kind = kind;
  FitParams p = guess;
  double cost = prob.cost(p);
  double lambda = 1e-3;
  bool singular = false;

  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  int iter = 0;
  bool done = false;
  for (; iter < 500 && !done; ++iter) {
    prob.jacobian(p, jac, res);
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * res;
    if (!jtj.allFinite() || jtj.diagonal().minCoeff() <= 0.0) {
      singular = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      const Eigen::Vector3d h = damped.ldlt().solve(jtr);
      if (!h.allFinite()) {
        singular = true;
        break;
      }
      const FitParams cand = clamp_params(apply_step(p, h), bounds);
      const double cand_cost = prob.cost(cand);
      if (cand_cost < cost) {
        const double rel_drop = (cost - cand_cost) / std::max(cost, 1e-300);
        p = cand;
        cost = cand_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel_drop < 1e-10) done = true;  // relative cost change converged
        break;
      }
      lambda *= 7.0;
    }
    if (singular) break;
    if (!accepted) done = true;  // no downhill step exists; at a minimum
  }
  out.converged = !singular;
  out.iterations = iter;

  // Gauss-Newton polish to pin the optimum to machine precision.
  if (out.converged) {
    for (int k = 0; k < 25; ++k) {
      prob.jacobian(p, jac, res);
      const Eigen::Matrix3d jtj = jac.transpose() * jac;
      const Eigen::Vector3d h = jtj.ldlt().solve(jac.transpose() * res);
      if (!h.allFinite()) break;
      const FitParams cand = clamp_params(apply_step(p, h), bounds);
      const double cand_cost = prob.cost(cand);
      if (cand_cost >= cost) break;
      const double rel_step =
          std::abs(h[0]) / std::max(std::abs(p.amplitude), 1e-300) +
          std::abs(h[1]) / std::max(std::abs(p.amplitude), 1e-300) +
          std::abs(h[2]) / std::max(std::abs(p.width), 1e-300);
      p = cand;
      cost = cand_cost;
      if (rel_step < 1e-13) break;
    }
  }

  out.params = p;
  prob.jacobian(p, jac, res);
  out.residuals = res;
  out.rms = std::sqrt(cost / s.size());

  // Standard errors from the linearized covariance at the optimum.
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  const double dof = std::max<double>(1.0, s.size() - 3);
  const Eigen::Matrix3d cov = jtj.inverse() * (cost / dof);
  if (cov.allFinite()) {
    out.std_errors.amplitude = std::sqrt(std::max(0.0, cov(0, 0)));
    out.std_errors.baseline = std::sqrt(std::max(0.0, cov(1, 1)));
    out.std_errors.width = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return out;
}

FitResult fit(const Spectrum& s, LineshapeKind kind) {
  FitParams guess;
  FitBounds bounds;
  auto_guess(s, kind, guess, bounds);
  return fit(s, kind, guess, bounds);
}

std::vector<FitResult> compare_models(const Spectrum& s) {
  std::vector<FitResult> results;
  for (const LineshapeKind kind : {LineshapeKind::Lorentzian, LineshapeKind::TY,
                                   LineshapeKind::TransitExponential}) {
    try {
      results.push_back(fit(s, kind));
    } catch (const std::exception&) {
      // non-convergence of one model is recorded by omission, not fatal
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const FitResult& a, const FitResult& b) { return a.rms < b.rms; });
  return results;
}

CentralPeakResult central_peak_width(const Spectrum& s) {
  CentralPeakResult out;
  const Eigen::Index n = s.size();
  const FitResult full = fit(s, LineshapeKind::TY);
  const double span = std::max(std::abs(s.detunings[0]), std::abs(s.detunings[n - 1]));

  // Candidate peak: largest positive residual in the central quarter.
  Eigen::Index peak_idx = -1;
  double peak = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s.detunings[i]) > 0.25 * span) continue;
    if (full.residuals[i] > peak) {
      peak = full.residuals[i];
      peak_idx = i;
    }
  }
  double wing_rms = 0.0;
  Eigen::Index wing_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s.detunings[i]) < 0.5 * span) continue;
    wing_rms += full.residuals[i] * full.residuals[i];
    ++wing_count;
  }
  wing_rms = wing_count > 0 ? std::sqrt(wing_rms / wing_count) : 0.0;

  if (peak_idx < 0 ||
      peak <= std::max(3.5 * wing_rms, 0.01 * full.params.amplitude)) {
    out.detected = false;
    out.pedestal = full;
    out.note = "no central excess above the pedestal fit";
    return out;
  }

  // Exclude the peak region (residual above a quarter of the peak, padded)
  // and refit the pedestal.
  Eigen::Index lo = peak_idx, hi = peak_idx;
  while (lo > 0 && full.residuals[lo - 1] > 0.25 * peak) --lo;
  while (hi + 1 < n && full.residuals[hi + 1] > 0.25 * peak) ++hi;
  const double local_spacing =
      peak_idx + 1 < n ? s.detunings[peak_idx + 1] - s.detunings[peak_idx]
                       : s.detunings[peak_idx] - s.detunings[peak_idx - 1];
  const double pad = 1.0 * (s.detunings[hi] - s.detunings[lo]) + 2.0 * local_spacing;
  const double excl_lo = s.detunings[lo] - pad;
  const double excl_hi = s.detunings[hi] + pad;

  std::vector<double> keep_d, keep_t;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.detunings[i] >= excl_lo && s.detunings[i] <= excl_hi) continue;
    keep_d.push_back(s.detunings[i]);
    keep_t.push_back(s.transmissions[i]);
  }
  if (keep_d.size() < 9) {
    out.detected = false;
    out.pedestal = full;
    out.note = "pedestal under-determined after excluding the peak";
    return out;
  }
  Spectrum pedestal_data;
  pedestal_data.source = s.source;
  pedestal_data.detunings = Eigen::Map<Eigen::VectorXd>(keep_d.data(), keep_d.size());
  pedestal_data.transmissions = Eigen::Map<Eigen::VectorXd>(keep_t.data(), keep_t.size());
  out.pedestal = fit(pedestal_data, LineshapeKind::TY);

  // Residual excess against the clean pedestal, half-maximum crossings.
  Eigen::VectorXd excess(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    excess[i] = s.transmissions[i] -
                (out.pedestal.params.baseline +
                 out.pedestal.params.amplitude *
                     fit_shape(LineshapeKind::TY, s.detunings[i],
                               out.pedestal.params.width));
  }
  Eigen::Index top = peak_idx;
  for (Eigen::Index i = lo; i <= hi; ++i) {
    if (excess[i] > excess[top]) top = i;
  }
  const double height = excess[top];
  if (height <= 0) {
    out.detected = false;
    out.note = "no positive excess after pedestal subtraction";
    return out;
  }
  const double half = 0.5 * height;
  double left = s.detunings[top], right = s.detunings[top];
  bool found_left = false, found_right = false;
  for (Eigen::Index i = top; i > 0; --i) {
    if (excess[i - 1] <= half) {
      const double u = (excess[i] - half) / (excess[i] - excess[i - 1]);
      left = s.detunings[i] - u * (s.detunings[i] - s.detunings[i - 1]);
      found_left = true;
      break;
    }
  }
  for (Eigen::Index i = top; i + 1 < n; ++i) {
    if (excess[i + 1] <= half) {
      const double u = (excess[i] - half) / (excess[i] - excess[i + 1]);
      right = s.detunings[i] + u * (s.detunings[i + 1] - s.detunings[i]);
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right) {
    out.detected = false;
    out.note = "central excess does not fall to half maximum inside the grid";
    return out;
  }
  Eigen::Index inside_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.detunings[i] > left && s.detunings[i] < right) ++inside_count;
  }
  if (inside_count < 3) {
    out.detected = false;
    out.note = "grid does not resolve the central excess";
    return out;
  }
  out.detected = true;
  out.peak_height = height;
  out.fwhm_hz = rad_to_hz(right - left);
  return out;
}

std::string kind_name(LineshapeKind kind) {
  switch (kind) {
    case LineshapeKind::Lorentzian: return "lorentzian";
    case LineshapeKind::TY: return "ty";
    case LineshapeKind::TransitExponential: return "transit";
  }
  return "unknown";
}

}  // namespace eitlab
