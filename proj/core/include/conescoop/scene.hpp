#pragma once

// Static scene: tilted spherical-cap container, granular material and sheet
// material presets. Lengths are metres, masses kilograms, angles radians.

#include <string>
#include <string_view>
#include <vector>

#include "conescoop/vec2.hpp"

namespace conescoop {

/// Spherical-cap container seen in the vertical plane through its centre.
/// The cap opens along `opening_axis()`, which is vertical tilted by
/// `tilt_angle` towards +x, so the lower rim sits on the +x side.
struct ContainerSpec {
  std::string label;
  double inner_diameter = 0.110;
  double tilt_angle = deg_to_rad(45.0);
  /// Cap depth measured from the pole along the axis; D/2 is a hemisphere.
  double rim_depth = 0.055;
  /// Shell thickness of the wall solid used for contact.
  double wall_thickness = 0.003;
  Vec2 center{};

  double radius() const { return 0.5 * inner_diameter; }
  Vec2 opening_axis() const;
  /// Half-aperture of the cap around the pole direction.
  double cap_half_angle() const;
  /// Inner-surface points where the cap ends, on the lower (+x) and upper side.
  Vec2 lower_rim() const;
  Vec2 upper_rim() const;
  /// Polar angle (atan2 about the centre) of the lower / upper rim.
  double lower_rim_angle() const;
  double upper_rim_angle() const;
  /// Lowest point of the inner surface under gravity.
  Vec2 lowest_point() const;
  /// Highest y reached by the wall solid.
  double top_y() const;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

ContainerSpec make_container(double inner_diameter, Vec2 center = {}, double tilt_angle = deg_to_rad(45.0));

struct SdfSample {
  double distance = 0.0;
  /// Unit gradient of the distance; points into the bowl on the inner side.
  Vec2 normal;
};

/// Exact signed distance to the wall solid: negative inside the wall, zero on
/// the inner surface, positive in the bowl interior and in open air.
SdfSample container_sdf(const ContainerSpec& spec, const Vec2& point);

/// Trig-free evaluator for repeated SDF queries against one container.
class ContainerGeometry {
 public:
  explicit ContainerGeometry(const ContainerSpec& spec);
  SdfSample sdf(const Vec2& point) const;

 private:
  Vec2 center_, pole_, end_lo_, end_hi_;
  double r_mid_, half_t_, cos_half_;
};

/// True when the point lies inside the sphere and on the cap side of the rim.
bool in_bowl_interior(const ContainerSpec& spec, const Vec2& point);

struct GranularSpec {
  std::string material_name;
  double particle_radius_mean = 0.0005;
  /// Radii are uniform in mean * [1 - spread, 1 + spread].
  double particle_radius_spread = 0.2;
  /// Areal density of the 2D surrogate (kg/m^2).
  double particle_density = 70.0;
  double friction_coefficient = 0.5;
  /// Fraction of critical damping in normal contacts (0 = elastic).
  double restitution_damping = 0.5;
  /// Linear normal contact stiffness (N/m).
  double normal_stiffness = 800.0;
  double total_mass = 0.010;

  double max_radius() const { return particle_radius_mean * (1.0 + particle_radius_spread); }
  double min_radius() const { return particle_radius_mean * (1.0 - particle_radius_spread); }
  /// Expected mass of one particle.
  double mean_particle_mass() const;
  void validate() const;
};

struct SheetSpec {
  std::string material_name;
  double thickness = 0.0002;
  double elastic_modulus = 1.5e9;
  double density = 905.0;
  bool rigid = false;
  /// EI multiplier applied in rigid mode.
  double rigid_stiffness_factor = 1000.0;
  double friction_coefficient = 0.3;

  /// E t^3 / 12 per unit width (N m).
  double base_bending_stiffness() const;
  void validate() const;
};

GranularSpec granular_preset(std::string_view name);
SheetSpec sheet_preset(std::string_view name);

std::vector<std::string> granular_preset_names();
std::vector<std::string> sheet_preset_names();

}  // namespace conescoop
