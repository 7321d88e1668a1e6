#include "eitlab/coil.hpp"

#include <cmath>
#include <stdexcept>

#include "eitlab/units.hpp"

namespace eitlab {

namespace {

// B[G] = 0.1 * I[A] * dl x r / r^3 with lengths in cm (Gaussian-practical).
constexpr double kBiotSavartGaussCmPerAmp = 0.1;

WireSegment arc_element(double radius, double z, double phi_a, double phi_b,
                        double polarity) {
  WireSegment seg;
  seg.start = {radius * std::cos(phi_a), radius * std::sin(phi_a), z};
  seg.end = {radius * std::cos(phi_b), radius * std::sin(phi_b), z};
  const double mid = 0.5 * (phi_a + phi_b);
  seg.center = {radius * std::cos(mid), radius * std::sin(mid), z};
  const double len = radius * (phi_b - phi_a);
  seg.dl = {-len * std::sin(mid), len * std::cos(mid), 0.0};
  seg.polarity = polarity;
  return seg;
}

void append_arc(std::vector<WireSegment>& out, double radius, double z,
                double phi0, double phi1, double polarity) {
  const double span = std::abs(phi1 - phi0);
  const int n = std::max(2, static_cast<int>(std::ceil(span / (kPi / 180.0))));
  for (int i = 0; i < n; ++i) {
    const double a = phi0 + (phi1 - phi0) * i / n;
    const double b = phi0 + (phi1 - phi0) * (i + 1) / n;
    out.push_back(arc_element(radius, z, a, b, polarity));
  }
}

void append_leg(std::vector<WireSegment>& out, double radius, double phi,
                double z0, double z1, double polarity) {
  const double element = radius * (kPi / 180.0);  // match the arc resolution
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(z1 - z0) / element)));
  const double cx = radius * std::cos(phi);
  const double cy = radius * std::sin(phi);
  for (int i = 0; i < n; ++i) {
    const double za = z0 + (z1 - z0) * i / n;
    const double zb = z0 + (z1 - z0) * (i + 1) / n;
    out.push_back(WireSegment::from_chord({cx, cy, za}, {cx, cy, zb}, polarity));
  }
}

// One saddle unit: inner arc at z_in, axial legs out to z_out, return arc.
void append_saddle(std::vector<WireSegment>& out, const CoilGeometry& g,
                   double phi_center, double z_in, double z_out,
                   double polarity) {
  const double half = 0.5 * g.arc_angle_deg * kPi / 180.0;
  const double lo = phi_center - half;
  const double hi = phi_center + half;
  append_arc(out, g.radius, z_in, lo, hi, polarity);
  append_leg(out, g.radius, hi, z_in, z_out, polarity);
  append_arc(out, g.radius, z_out, hi, lo, polarity);
  append_leg(out, g.radius, lo, z_out, z_in, polarity);
}

}  // namespace

WireSegment WireSegment::from_chord(const Eigen::Vector3d& a,
                                    const Eigen::Vector3d& b, double polarity) {
  WireSegment seg;
  seg.start = a;
  seg.end = b;
  seg.center = 0.5 * (a + b);
  seg.dl = b - a;
  seg.polarity = polarity;
  return seg;
}

void validate(const CoilGeometry& g) {
  if (!(0 < g.z_inner && g.z_inner < g.z_outer)) {
    throw std::invalid_argument("coil: need 0 < z_inner < z_outer");
  }
  if (g.radius <= 0) throw std::invalid_argument("coil: radius must be > 0");
  if (!(g.arc_angle_deg > 0 && g.arc_angle_deg < 180)) {
    throw std::invalid_argument("coil: arc angle must be in (0, 180) degrees");
  }
  if (g.turns < 1) throw std::invalid_argument("coil: turns must be >= 1");
}

std::vector<WireSegment> build_loop(double radius, double z0, double polarity,
                                    int elements) {
  if (radius <= 0 || elements < 3) {
    throw std::invalid_argument("build_loop: bad radius or element count");
  }
  std::vector<WireSegment> out;
  out.reserve(elements);
  for (int i = 0; i < elements; ++i) {
    const double a = kTwoPi * i / elements;
    const double b = kTwoPi * (i + 1) / elements;
    out.push_back(arc_element(radius, z0, a, b, polarity));
  }
  return out;
}

std::vector<WireSegment> build_golay_set(const CoilGeometry& g) {
  validate(g);
  std::vector<WireSegment> out;
  // Saddles straddle +x and -x with opposite circulation so Bz is odd in x;
  // the lower pair mirrors the upper one in z so Bz is even in z.
  const double p = static_cast<double>(g.turns);
  append_saddle(out, g, 0.0, g.z_inner, g.z_outer, +p);
  append_saddle(out, g, kPi, g.z_inner, g.z_outer, -p);
  append_saddle(out, g, 0.0, -g.z_inner, -g.z_outer, +p);
  append_saddle(out, g, kPi, -g.z_inner, -g.z_outer, -p);
  return out;
}

Eigen::Vector3d biot_savart(const std::vector<WireSegment>& segments,
                            const Eigen::Vector3d& point, double current,
                            bool* accuracy_warning) {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  bool warn = false;
  for (const WireSegment& seg : segments) {
    const Eigen::Vector3d r = point - seg.center;
    const double dist = r.norm();
    if (dist == 0.0) throw std::domain_error("biot_savart: point on a wire element");
    if (dist < 10.0 * seg.dl.norm()) warn = true;
    b += seg.polarity * seg.dl.cross(r) / (dist * dist * dist);
  }
  if (accuracy_warning) *accuracy_warning = warn;
  return kBiotSavartGaussCmPerAmp * current * b;
}

FieldMap sample_field(const std::vector<WireSegment>& segments, double current,
                      const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                      const Eigen::Vector3i& shape) {
  if ((shape.array() < 2).any()) {
    throw std::invalid_argument("field map: need >= 2 points per axis");
  }
  FieldMap map;
  map.origin = lo;
  map.shape = shape;
  map.spacing = (hi - lo).cwiseQuotient((shape - Eigen::Vector3i::Ones()).cast<double>());
  map.field.resize(static_cast<std::size_t>(shape.x()) * shape.y() * shape.z());
  for (int k = 0; k < shape.z(); ++k) {
    for (int j = 0; j < shape.y(); ++j) {
      for (int i = 0; i < shape.x(); ++i) {
        map.field[map.index(i, j, k)] =
            biot_savart(segments, map.point(i, j, k), current);
      }
    }
  }
  return map;
}

double gradient_at_center(const std::vector<WireSegment>& segments,
                          double current) {
  const double h = 0.05;
  const Eigen::Vector3d plus = biot_savart(segments, {h, 0, 0}, current);
  const Eigen::Vector3d minus = biot_savart(segments, {-h, 0, 0}, current);
  return (plus.z() - minus.z()) / (2.0 * h) / current;
}

FieldQualityReport curl_and_linearity_report(
    const std::vector<WireSegment>& segments, double current,
    double half_extent_cm, double step_cm) {
  if (step_cm > 0.1) {
    throw std::invalid_argument("field-quality report needs step <= 0.1 cm");
  }
  FieldQualityReport report;
  const double g0 = gradient_at_center(segments, current);
  report.gradient_g_per_cm_a = g0;
  const double scale = std::abs(g0 * current);

  const double h = step_cm;
  auto field = [&](double x, double y, double z) {
    return biot_savart(segments, {x, y, z}, current);
  };

  const int n = static_cast<int>(std::round(half_extent_cm / h));
  for (int ix = -n; ix <= n; ++ix) {
    for (int iz = -n; iz <= n; ++iz) {
      const double x = ix * h;
      const double z = iz * h;
      const Eigen::Vector3d bxp = field(x + h, 0, z);
      const Eigen::Vector3d bxm = field(x - h, 0, z);
      const Eigen::Vector3d byp = field(x, h, z);
      const Eigen::Vector3d bym = field(x, -h, z);
      const Eigen::Vector3d bzp = field(x, 0, z + h);
      const Eigen::Vector3d bzm = field(x, 0, z - h);
      const double dbz_dx = (bxp.z() - bxm.z()) / (2 * h);
      const double dbx_dz = (bzp.x() - bzm.x()) / (2 * h);
      const double div = (bxp.x() - bxm.x()) / (2 * h) +
                         (byp.y() - bym.y()) / (2 * h) +
                         (bzp.z() - bzm.z()) / (2 * h);
      report.max_curl_residual =
          std::max(report.max_curl_residual, std::abs(dbz_dx - dbx_dz) / scale);
      report.max_divergence = std::max(report.max_divergence, std::abs(div) / scale);
      if (iz == 0) {
        report.linearity_deviation = std::max(
            report.linearity_deviation, std::abs(dbz_dx / (g0 * current) - 1.0));
      }
    }
  }
  return report;
}

DistortionCheck distortion_check(double gradient_g_per_cm, double cell_length_cm,
                                 double b0_gauss) {
  if (b0_gauss <= 0) throw std::domain_error("distortion_check: B0 must be > 0");
  DistortionCheck check;
  check.ratio = std::abs(gradient_g_per_cm) * cell_length_cm / 2.0 /
                (std::sqrt(2.0) * b0_gauss);
  if (check.ratio < 0.1) {
    check.status = DistortionStatus::Pass;
  } else if (check.ratio < 0.2) {
    check.status = DistortionStatus::Warn;
  } else {
    check.status = DistortionStatus::Fail;
  }
  check.pass = check.status == DistortionStatus::Pass;
  return check;
}

}  // namespace eitlab
