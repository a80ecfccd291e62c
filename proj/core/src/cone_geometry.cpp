#include "conescoop/cone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace conescoop {

namespace {

void require_positive_radius(double sheet_radius) {
  if (!(sheet_radius > 0.0)) {
    throw std::domain_error("sheet radius must be positive, got " + std::to_string(sheet_radius));
  }
}

void require_diameter_in_range(double sheet_radius, double d) {
  if (!(d > 0.0) || d > 2.0 * sheet_radius) {
    throw std::domain_error("bottom diameter " + std::to_string(d) + " outside (0, 2R] for R = " +
                            std::to_string(sheet_radius));
  }
}

}  // namespace

double bottom_diameter(double sheet_radius, double slide_angle) {
  require_positive_radius(sheet_radius);
  if (!(slide_angle >= 0.0) || !(slide_angle < kTwoPi)) {
    throw std::domain_error("slide angle " + std::to_string(slide_angle) + " rad outside [0, 2pi)");
  }
  return 2.0 * sheet_radius * (1.0 - slide_angle / kTwoPi);
}

double slide_angle_for_diameter(double sheet_radius, double bottom_diameter) {
  require_positive_radius(sheet_radius);
  require_diameter_in_range(sheet_radius, bottom_diameter);
  return kTwoPi * (1.0 - bottom_diameter / (2.0 * sheet_radius));
}

double min_insertion_angle(double sheet_radius, double container_diameter) {
  require_positive_radius(sheet_radius);
  if (!(container_diameter > 0.0)) {
    throw std::domain_error("container diameter must be positive");
  }
  if (container_diameter <= sheet_radius) {
    throw std::domain_error("container diameter " + std::to_string(container_diameter) +
                            " is not larger than the sheet radius " + std::to_string(sheet_radius) +
                            "; no cone configuration fits");
  }
  return std::max(0.0, kTwoPi * (1.0 - container_diameter / (2.0 * sheet_radius)));
}

double vertex_angle(double sheet_radius, double bottom_diameter) {
  require_positive_radius(sheet_radius);
  require_diameter_in_range(sheet_radius, bottom_diameter);
  return 2.0 * std::asin(std::min(1.0, bottom_diameter / (2.0 * sheet_radius)));
}

double min_practical_diameter(double sheet_radius, double min_vertex_angle) {
  require_positive_radius(sheet_radius);
  if (!(min_vertex_angle > 0.0) || min_vertex_angle > std::numbers::pi) {
    throw std::domain_error("minimum vertex angle outside (0, pi]");
  }
  return 2.0 * sheet_radius * std::sin(min_vertex_angle / 2.0);
}

ConeConfig ConeConfig::from_slide_angle(double sheet_radius, double slide_angle) {
  const double d = conescoop::bottom_diameter(sheet_radius, slide_angle);
  return ConeConfig(sheet_radius, slide_angle, d, conescoop::vertex_angle(sheet_radius, d));
}

ConeConfig ConeConfig::from_bottom_diameter(double sheet_radius, double bottom_diameter) {
  const double theta = slide_angle_for_diameter(sheet_radius, bottom_diameter);
  return from_slide_angle(sheet_radius, theta);
}

InsertabilityVerdict insertability(const ConeConfig& cone, double container_diameter) {
  InsertabilityVerdict v;
  v.rigid_insertable = cone.bottom_diameter() < container_diameter;
  v.deformation_required = !v.rigid_insertable;
  v.min_slide_angle =
      std::max(0.0, kTwoPi * (1.0 - container_diameter / (2.0 * cone.sheet_radius())));
  return v;
}

}  // namespace conescoop
