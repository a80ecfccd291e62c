#include "conescoop/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conescoop {

namespace {

Vec2 pole_direction(const ContainerSpec& s) { return -s.opening_axis(); }

std::string join(const std::vector<std::string>& names) {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  return os.str();
}

}  // namespace

Vec2 ContainerSpec::opening_axis() const { return {std::sin(tilt_angle), std::cos(tilt_angle)}; }

double ContainerSpec::cap_half_angle() const {
  const double r = radius();
  return std::acos(std::clamp((r - rim_depth) / r, -1.0, 1.0));
}

Vec2 ContainerSpec::lower_rim() const { return center + radius() * unit_from_angle(lower_rim_angle()); }
Vec2 ContainerSpec::upper_rim() const { return center + radius() * unit_from_angle(upper_rim_angle()); }

double ContainerSpec::lower_rim_angle() const { return angle_of(pole_direction(*this)) + cap_half_angle(); }
double ContainerSpec::upper_rim_angle() const { return angle_of(pole_direction(*this)) - cap_half_angle(); }

Vec2 ContainerSpec::lowest_point() const {
  const Vec2 down{0.0, -1.0};
  const double off = std::acos(std::clamp(dot(down, pole_direction(*this)), -1.0, 1.0));
  if (off <= cap_half_angle()) return center + radius() * down;
  const Vec2 a = lower_rim();
  const Vec2 b = upper_rim();
  return a.y <= b.y ? a : b;
}

double ContainerSpec::top_y() const {
  const double r_mid = radius() + 0.5 * wall_thickness;
  const double half_t = 0.5 * wall_thickness;
  double top = std::max(std::sin(lower_rim_angle()), std::sin(upper_rim_angle())) * r_mid + half_t;
  const Vec2 up{0.0, 1.0};
  const double off = std::acos(std::clamp(dot(up, pole_direction(*this)), -1.0, 1.0));
  if (off <= cap_half_angle()) top = radius() + wall_thickness;
  return center.y + top;
}

void ContainerSpec::validate() const {
  if (!(inner_diameter > 0.0)) throw std::invalid_argument("container: inner diameter must be positive");
  if (!(tilt_angle >= 0.0) || !(tilt_angle < std::numbers::pi / 2.0)) {
    throw std::invalid_argument("container: tilt angle must lie in [0, 90) degrees");
  }
  if (!(rim_depth > 0.0) || rim_depth > radius() * (1.0 + 1e-12)) {
    throw std::invalid_argument("container: rim depth must lie in (0, D/2]");
  }
  if (!(wall_thickness > 0.0)) throw std::invalid_argument("container: wall thickness must be positive");
}

ContainerSpec make_container(double inner_diameter, Vec2 center, double tilt_angle) {
  ContainerSpec c;
  std::ostringstream label;
  label << "bowl_" << std::lround(inner_diameter * 1000.0);
  c.label = label.str();
  c.inner_diameter = inner_diameter;
  c.rim_depth = 0.5 * inner_diameter;
  c.tilt_angle = tilt_angle;
  c.center = center;
  return c;
}

ContainerGeometry::ContainerGeometry(const ContainerSpec& spec)
    : center_(spec.center),
      pole_(pole_direction(spec)),
      r_mid_(spec.radius() + 0.5 * spec.wall_thickness),
      half_t_(0.5 * spec.wall_thickness),
      cos_half_(std::cos(spec.cap_half_angle())) {
  // Wall ends on the positive and negative side of the pole.
  end_lo_ = r_mid_ * rotated(pole_, spec.cap_half_angle());
  end_hi_ = r_mid_ * rotated(pole_, -spec.cap_half_angle());
}

SdfSample ContainerGeometry::sdf(const Vec2& point) const {
  // Distance to the mid-surface arc of the shell, minus half the thickness.
  const Vec2 q = point - center_;
  const double qn = norm(q);
  if (qn == 0.0) return {r_mid_ - half_t_, -pole_};
  if (dot(pole_, q) >= qn * cos_half_) {
    const double radial = qn - r_mid_;
    return {std::abs(radial) - half_t_, (radial >= 0.0 ? 1.0 : -1.0) * (q / qn)};
  }
  const Vec2 diff = q - (cross(pole_, q) > 0.0 ? end_lo_ : end_hi_);
  const double dn = norm(diff);
  return {dn - half_t_, dn > 0.0 ? diff / dn : -pole_};
}

SdfSample container_sdf(const ContainerSpec& spec, const Vec2& point) { return ContainerGeometry(spec).sdf(point); }

bool in_bowl_interior(const ContainerSpec& spec, const Vec2& point) {
  const Vec2 q = point - spec.center;
  if (norm2(q) >= spec.radius() * spec.radius()) return false;
  return dot(q, pole_direction(spec)) >= spec.radius() - spec.rim_depth;
}

double GranularSpec::mean_particle_mass() const {
  // E[r^2] for r uniform in mean*(1 +- spread).
  const double r2 = particle_radius_mean * particle_radius_mean *
                    (1.0 + particle_radius_spread * particle_radius_spread / 3.0);
  return particle_density * std::numbers::pi * r2;
}

void GranularSpec::validate() const {
  if (!(particle_radius_mean > 0.0)) throw std::invalid_argument(material_name + ": particle radius must be positive");
  if (!(particle_radius_spread >= 0.0) || !(particle_radius_spread < 0.5)) {
    throw std::invalid_argument(material_name + ": radius spread must lie in [0, 0.5)");
  }
  if (!(particle_density > 0.0)) throw std::invalid_argument(material_name + ": density must be positive");
  if (!(friction_coefficient >= 0.0)) throw std::invalid_argument(material_name + ": friction must be >= 0");
  if (!(restitution_damping >= 0.0) || !(restitution_damping < 1.0)) {
    throw std::invalid_argument(material_name + ": damping ratio must lie in [0, 1)");
  }
  if (!(normal_stiffness > 0.0)) throw std::invalid_argument(material_name + ": normal stiffness must be positive");
  if (!(total_mass >= 0.0)) throw std::invalid_argument(material_name + ": total mass must be >= 0");
}

double SheetSpec::base_bending_stiffness() const {
  return elastic_modulus * thickness * thickness * thickness / 12.0;
}

void SheetSpec::validate() const {
  if (!(thickness > 0.0)) throw std::invalid_argument(material_name + ": sheet thickness must be positive");
  if (!(elastic_modulus > 0.0)) throw std::invalid_argument(material_name + ": elastic modulus must be positive");
  if (!(density > 0.0)) throw std::invalid_argument(material_name + ": density must be positive");
  if (rigid && !(rigid_stiffness_factor >= 1.0)) {
    throw std::invalid_argument(material_name + ": rigid stiffness factor must be >= 1");
  }
  if (!(friction_coefficient >= 0.0)) throw std::invalid_argument(material_name + ": friction must be >= 0");
}

// Simulation radii are far above true grain sizes; only their ordering
// (flour < coffee < rice) is meant to carry over. All three share one areal
// density, so 10 g occupies the same cross-section area regardless of grain.
GranularSpec granular_preset(std::string_view name) {
  GranularSpec g;
  g.material_name = std::string(name);
  if (name == "flour") {
    g.particle_radius_mean = 0.0005;
    g.particle_radius_spread = 0.2;
    g.friction_coefficient = 0.6;
    g.restitution_damping = 0.5;
    g.normal_stiffness = 800.0;
  } else if (name == "coffee") {
    g.particle_radius_mean = 0.0008;
    g.particle_radius_spread = 0.2;
    g.friction_coefficient = 0.5;
    g.restitution_damping = 0.5;
    g.normal_stiffness = 1500.0;
  } else if (name == "rice") {
    g.particle_radius_mean = 0.0015;
    g.particle_radius_spread = 0.1;
    g.friction_coefficient = 0.4;
    g.restitution_damping = 0.5;
    g.normal_stiffness = 4000.0;
  } else {
    throw std::invalid_argument("unknown granular preset '" + std::string(name) +
                                "'; available: " + join(granular_preset_names()));
  }
  g.particle_density = 70.0;
  g.total_mass = 0.010;
  return g;
}

SheetSpec sheet_preset(std::string_view name) {
  SheetSpec s;
  s.material_name = std::string(name);
  if (name == "pp_sheet") {
    s.thickness = 0.0002;
    s.elastic_modulus = 1.5e9;
    s.density = 905.0;
    s.rigid = false;
    s.friction_coefficient = 0.3;
  } else if (name == "sus304_sheet") {
    s.thickness = 0.0001;
    s.elastic_modulus = 193e9;
    s.density = 8000.0;
    s.rigid = true;
    s.friction_coefficient = 0.25;
  } else if (name == "silicone_ladle") {
    // Body is rigid; the compliant lip uses the plain silicone stiffness.
    s.thickness = 0.002;
    s.elastic_modulus = 5e6;
    s.density = 1200.0;
    s.rigid = true;
    s.friction_coefficient = 0.5;
  } else {
    throw std::invalid_argument("unknown sheet preset '" + std::string(name) +
                                "'; available: " + join(sheet_preset_names()));
  }
  return s;
}

std::vector<std::string> granular_preset_names() { return {"flour", "coffee", "rice"}; }
std::vector<std::string> sheet_preset_names() { return {"pp_sheet", "sus304_sheet", "silicone_ladle"}; }

}  // namespace conescoop
