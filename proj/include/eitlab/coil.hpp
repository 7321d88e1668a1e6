#pragma once

#include <Eigen/Core>
#include <vector>

namespace eitlab {

// Transverse-gradient (Golay/saddle) coil set on a cylinder, reconstructed
// from the published dimensions. Lengths in cm, currents in A, fields in G.
struct CoilGeometry {
  double z_inner = 2.4;       // cm, inner arc plane |z|
  double z_outer = 16.2;      // cm, outer arc plane |z|
  double radius = 6.4;        // cm, cylinder radius
  double arc_angle_deg = 120; // azimuthal arc span
  int turns = 1;
  double current = 1.0;       // A

  double ampere_turns() const { return turns * current; }
};

void validate(const CoilGeometry& geometry);

// One discretized current element. Endpoints sit on the source curve and
// chain into closed loops; the Biot-Savart quadrature uses the on-curve
// element center and tangent (exact for on-axis loop fields).
struct WireSegment {
  Eigen::Vector3d start;   // cm
  Eigen::Vector3d end;     // cm
  Eigen::Vector3d center;  // on-curve element midpoint, cm
  Eigen::Vector3d dl;      // tangent * element length, cm
  double polarity = 1.0;   // signed multiple of the drive current

  static WireSegment from_chord(const Eigen::Vector3d& a,
                                const Eigen::Vector3d& b, double polarity);
};

// Circular loop of given radius in the plane z = z0, for oracle checks.
std::vector<WireSegment> build_loop(double radius, double z0, double polarity,
                                    int elements = 360);

// Discretizes the four saddle units (arcs at +-z_inner / +-z_outer joined by
// axial legs) with arc elements no coarser than 1 degree. Current signs put
// zero field at the center and dBz/dx as the leading term.
std::vector<WireSegment> build_golay_set(const CoilGeometry& geometry);

// Biot-Savart sum over elements, returning Gauss for current in amperes and
// distances in cm. Sets the flag when the point is closer than ten element
// lengths to a wire.
Eigen::Vector3d biot_savart(const std::vector<WireSegment>& segments,
                            const Eigen::Vector3d& point, double current,
                            bool* accuracy_warning = nullptr);

struct FieldMap {
  Eigen::Vector3d origin;   // grid corner, cm
  Eigen::Vector3d spacing;  // per-axis, cm
  Eigen::Vector3i shape;    // points per axis
  std::vector<Eigen::Vector3d> field;  // G, x fastest

  Eigen::Index index(int i, int j, int k) const {
    return (static_cast<Eigen::Index>(k) * shape.y() + j) * shape.x() + i;
  }
  Eigen::Vector3d point(int i, int j, int k) const {
    return origin + Eigen::Vector3d(i * spacing.x(), j * spacing.y(), k * spacing.z());
  }
};

FieldMap sample_field(const std::vector<WireSegment>& segments, double current,
                      const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                      const Eigen::Vector3i& shape);

// Central finite difference of Bz along x at the origin, per ampere,
// step 0.05 cm.
double gradient_at_center(const std::vector<WireSegment>& segments,
                          double current);

struct FieldQualityReport {
  double gradient_g_per_cm_a = 0.0;   // dBz/dx at center, per ampere
  double max_curl_residual = 0.0;     // relative |dBz/dx - dBx/dz|
  double max_divergence = 0.0;        // relative |div B|
  double linearity_deviation = 0.0;   // max fractional dBz/dx drift, |x|<=1
};

// Finite-difference field-quality metrics over the central region.
FieldQualityReport curl_and_linearity_report(
    const std::vector<WireSegment>& segments, double current,
    double half_extent_cm = 1.0, double step_cm = 0.1);

enum class DistortionStatus { Pass, Warn, Fail };

struct DistortionCheck {
  double ratio = 0.0;
  DistortionStatus status = DistortionStatus::Pass;
  bool pass = true;
};

// Transverse-field distortion constraint: ratio = (Gx L / 2) / (sqrt(2) B0).
// "Much less than" is quantified as < 0.1, with a warning band up to 0.2.
DistortionCheck distortion_check(double gradient_g_per_cm, double cell_length_cm,
                                 double b0_gauss);

}  // namespace eitlab
