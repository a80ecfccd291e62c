#pragma once

// Reconfigurable conical sheet: a flat disc of radius R whose edge is slid
// over itself by a slide angle theta, closing into a cone with bottom
// diameter d and full vertex angle phi. All lengths share one unit; the
// functions only depend on ratios.

#include <numbers>

namespace conescoop {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Practical lower bound on the vertex angle (90 degrees).
inline constexpr double kDefaultMinVertexAngle = std::numbers::pi / 2.0;

/// d = 2R(1 - theta/2pi). Throws std::domain_error unless R > 0 and
/// 0 <= theta < 2pi.
double bottom_diameter(double sheet_radius, double slide_angle);

/// Inverse of bottom_diameter. Requires 0 < d <= 2R.
double slide_angle_for_diameter(double sheet_radius, double bottom_diameter);

/// Smallest slide angle that lets the cone enter a container of diameter D:
/// max(0, 2pi(1 - D/2R)). Any strictly larger angle gives d < D.
/// Throws std::domain_error when D <= R, since no slide angle short of a
/// degenerate cone fits such a container.
double min_insertion_angle(double sheet_radius, double container_diameter);

/// Full vertex angle 2*asin(d/2R), in (0, pi]. pi is the flat sheet.
double vertex_angle(double sheet_radius, double bottom_diameter);

/// Bottom diameter at the vertex-angle floor: 2R sin(phi_min/2).
double min_practical_diameter(double sheet_radius, double min_vertex_angle = kDefaultMinVertexAngle);

class ConeConfig {
 public:
  static ConeConfig from_slide_angle(double sheet_radius, double slide_angle);
  static ConeConfig from_bottom_diameter(double sheet_radius, double bottom_diameter);

  double sheet_radius() const { return sheet_radius_; }
  double slide_angle() const { return slide_angle_; }
  double bottom_diameter() const { return bottom_diameter_; }
  double vertex_angle() const { return vertex_angle_; }

 private:
  ConeConfig(double r, double theta, double d, double phi)
      : sheet_radius_(r), slide_angle_(theta), bottom_diameter_(d), vertex_angle_(phi) {}

  double sheet_radius_;
  double slide_angle_;
  double bottom_diameter_;
  double vertex_angle_;
};

struct InsertabilityVerdict {
  bool rigid_insertable = false;
  double min_slide_angle = 0.0;
  /// The cone can only enter by deforming elastically (d >= D).
  bool deformation_required = false;
};

InsertabilityVerdict insertability(const ConeConfig& cone, double container_diameter);

}  // namespace conescoop
