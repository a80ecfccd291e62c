#include "conescoop/sheet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace conescoop {

namespace {

// Pseudo-masses keep dt at this fraction of 2/omega for the stiffest node.
// 0.3 went unstable with joint damping on for 24+ segments.
constexpr double kStabilitySafety = 0.2;

Vec2 angle_gradient(const Vec2& e) { return perp(e) / norm2(e); }

Vec2 rest_shape_tip_local(const SheetState& s) {
  Vec2 p{};
  double heading = 0.0;
  for (std::size_t seg = 0; seg < s.segment_count(); ++seg) {
    heading += s.rest_turn[seg];
    p += s.segment_rest_length * unit_from_angle(heading);
  }
  return p;
}

double joint_stiffness(const SheetState& s, std::size_t joint) {
  const double l = s.segment_rest_length;
  if (joint == 0) return 2.0 * s.effective_ei[0] / l;
  return 0.5 * (s.effective_ei[joint - 1] + s.effective_ei[joint]) / l;
}

std::vector<Vec2> rest_nodes(const Pose2& base, double seg_len, std::span<const double> rest_turn,
                             std::size_t segments) {
  std::vector<Vec2> nodes;
  nodes.reserve(segments + 1);
  nodes.push_back(base.position);
  double heading = base.angle;
  for (std::size_t seg = 0; seg < segments; ++seg) {
    heading += rest_turn[seg];
    nodes.push_back(nodes.back() + seg_len * unit_from_angle(heading));
  }
  return nodes;
}

}  // namespace

Vec2 SheetState::undeformed_tip() const { return base_pose.apply(rest_shape_tip_local(*this)); }

Vec2 SheetState::back_wall_tip() const {
  return base_pose.position + back_wall_length * unit_from_angle(base_pose.angle + back_wall_angle);
}

double stiffness_multiplier(const ConeConfig& cone, double anisotropy_gain) {
  return 1.0 + anisotropy_gain * (2.0 * cone.sheet_radius() / cone.bottom_diameter() - 1.0);
}

SheetState build_sheet(const SheetSpec& sheet, const ConeConfig& cone, std::size_t segments,
                       const SheetBuildOptions& options) {
  sheet.validate();
  if (segments < kMinSheetSegments) {
    throw std::invalid_argument("sheet needs at least " + std::to_string(kMinSheetSegments) +
                                " segments, got " + std::to_string(segments));
  }
  SheetState s;
  s.base_pose = options.base_pose;
  s.segment_rest_length = cone.sheet_radius() / static_cast<double>(segments);
  s.section_width = options.section_width > 0.0 ? options.section_width : cone.bottom_diameter();
  s.stiffness_multiplier = stiffness_multiplier(cone, options.anisotropy_gain);
  double ei = sheet.base_bending_stiffness() * s.section_width * s.stiffness_multiplier;
  if (sheet.rigid) ei *= sheet.rigid_stiffness_factor;
  s.effective_ei.assign(segments, ei);
  s.rest_turn.assign(segments, 0.0);
  s.nodes = rest_nodes(s.base_pose, s.segment_rest_length, s.rest_turn, segments);
  s.node_velocities.assign(segments + 1, Vec2{});
  s.frame_pose = s.base_pose;
  s.deform_velocities.assign(segments + 1, Vec2{});

  const double seg_mass = sheet.density * sheet.thickness * s.section_width * s.segment_rest_length;
  s.node_mass.assign(segments + 1, seg_mass);
  s.node_mass.front() = s.node_mass.back() = 0.5 * seg_mass;

  s.thickness = sheet.thickness;
  s.friction_coefficient = sheet.friction_coefficient;
  s.damping_ratio = options.damping_ratio;
  if (options.with_back_wall) {
    // Opposite generator of the cone, on the carrying (clockwise) side.
    s.back_wall_length = cone.sheet_radius();
    s.back_wall_angle = -cone.vertex_angle();
  }
  return s;
}

SheetState build_ladle(const SheetSpec& sheet, const LadleProfile& profile, std::size_t segments,
                       const Pose2& base_pose, double damping_ratio) {
  sheet.validate();
  if (segments < kMinSheetSegments) {
    throw std::invalid_argument("ladle needs at least " + std::to_string(kMinSheetSegments) + " segments");
  }
  if (!(profile.width > 0.0) || !(profile.depth >= 0.0) || profile.depth >= 0.5 * profile.width) {
    throw std::invalid_argument("ladle profile needs width > 0 and 0 <= depth < width/2");
  }
  // Circular arc through both chord ends with the given sagitta.
  const double half_chord = 0.5 * profile.width;
  double half_arc = 0.0;
  double arc_len = profile.width;
  if (profile.depth > 0.0) {
    const double radius = (half_chord * half_chord + profile.depth * profile.depth) / (2.0 * profile.depth);
    half_arc = std::asin(half_chord / radius);
    arc_len = 2.0 * half_arc * radius;
  }
  SheetState s;
  s.base_pose = base_pose;
  s.segment_rest_length = arc_len / static_cast<double>(segments);
  s.section_width = profile.width;
  const double turn = 2.0 * half_arc / static_cast<double>(segments);
  s.rest_turn.assign(segments, -turn);
  // First segment starts bent towards the convex side; chord stays on the heading.
  s.rest_turn[0] = half_arc - 0.5 * turn;

  const double soft_ei = sheet.base_bending_stiffness() * s.section_width;
  const double hard_ei = sheet.rigid ? soft_ei * sheet.rigid_stiffness_factor : soft_ei;
  s.effective_ei.assign(segments, hard_ei);
  const auto soft_segments = static_cast<std::size_t>(
      std::ceil(profile.compliant_tip_length / s.segment_rest_length - 1e-9));
  for (std::size_t k = 0; k < std::min(soft_segments, segments); ++k) s.effective_ei[segments - 1 - k] = soft_ei;

  s.nodes = rest_nodes(s.base_pose, s.segment_rest_length, s.rest_turn, segments);
  s.node_velocities.assign(segments + 1, Vec2{});
  s.frame_pose = s.base_pose;
  s.deform_velocities.assign(segments + 1, Vec2{});
  const double seg_mass = sheet.density * sheet.thickness * s.section_width * s.segment_rest_length;
  s.node_mass.assign(segments + 1, seg_mass);
  s.node_mass.front() = s.node_mass.back() = 0.5 * seg_mass;
  s.thickness = sheet.thickness;
  s.friction_coefficient = sheet.friction_coefficient;
  s.damping_ratio = damping_ratio;
  return s;
}

void drive_base(SheetState& state, const Pose2& pose, double dt) {
  state.base_velocity = (pose.position - state.base_pose.position) / dt;
  state.base_angular_velocity = wrap_angle(pose.angle - state.base_pose.angle) / dt;
  state.base_pose = pose;
}

void advance_sheet(SheetState& s, std::span<const Vec2> external_forces, double dt) {
  const std::size_t n_nodes = s.nodes.size();
  const std::size_t n_seg = s.segment_count();
  if (external_forces.size() != n_nodes) {
    throw std::invalid_argument("advance_sheet: expected one force per node");
  }
  const double l = s.segment_rest_length;

  double max_ei = 0.0;
  for (double ei : s.effective_ei) max_ei = std::max(max_ei, ei);
  // Node 1 sees the clamp spring plus two interior joints.
  const double k_node = 10.0 * max_ei / (l * l * l) + s.contact_stiffness_hint;
  const double pseudo_mass = k_node * (dt / (2.0 * kStabilitySafety)) * (dt / (2.0 * kStabilitySafety));

  std::vector<double> inertia(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) inertia[i] = std::max(s.node_mass[i], pseudo_mass);

  // Carry the rod rigidly with the base; only the deformation is integrated.
  std::vector<Vec2> old = s.nodes;
  if (s.deform_velocities.size() != n_nodes) s.deform_velocities.assign(n_nodes, Vec2{});
  const double turn = wrap_angle(s.base_pose.angle - s.frame_pose.angle);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    s.nodes[i] = s.base_pose.position + rotated(s.nodes[i] - s.frame_pose.position, turn);
    s.deform_velocities[i] = rotated(s.deform_velocities[i], turn);
  }
  s.frame_pose = s.base_pose;
  const std::vector<Vec2> carried = s.nodes;
  std::vector<Vec2>& vel = s.deform_velocities;

  std::vector<Vec2> force(external_forces.begin(), external_forces.end());
  std::vector<Vec2> seg(n_seg);
  std::vector<double> seg_angle(n_seg);
  for (std::size_t k = 0; k < n_seg; ++k) {
    seg[k] = s.nodes[k + 1] - s.nodes[k];
    seg_angle[k] = angle_of(seg[k]);
  }

  for (std::size_t j = 0; j < n_seg; ++j) {
    const double k = joint_stiffness(s, j);
    const double c = 2.0 * s.damping_ratio * std::sqrt(k * inertia[std::min(j + 1, n_nodes - 1)] * l * l / 6.0);
    if (j == 0) {
      const double theta = wrap_angle(seg_angle[0] - s.base_pose.angle) - s.rest_turn[0];
      const Vec2 g1 = angle_gradient(seg[0]);
      const double rate = dot(g1, vel[1]);
      force[1] -= (k * theta + c * rate) * g1;
      continue;
    }
    const double theta = wrap_angle(seg_angle[j] - seg_angle[j - 1]) - s.rest_turn[j];
    const Vec2 g_prev = angle_gradient(seg[j - 1]);
    const Vec2 g_next = angle_gradient(seg[j]);
    // d(theta)/dx for nodes j-1, j, j+1.
    const Vec2 d0 = g_prev;
    const Vec2 d1 = -g_next - g_prev;
    const Vec2 d2 = g_next;
    const double rate =
        dot(d0, vel[j - 1]) + dot(d1, vel[j]) + dot(d2, vel[j + 1]);
    const double moment = k * theta + c * rate;
    force[j - 1] -= moment * d0;
    force[j] -= moment * d1;
    force[j + 1] -= moment * d2;
  }

  // Joint dampers act on the short modes only; add drag tuned to the first
  // cantilever mode, from the softest section so nothing is overdamped.
  double min_ei = max_ei, total_inertia = 0.0;
  for (double ei : s.effective_ei) min_ei = std::min(min_ei, ei);
  for (std::size_t i = 1; i < n_nodes; ++i) total_inertia += inertia[i];
  const double rod_len = l * static_cast<double>(n_seg);
  const double omega1 = 3.516 * std::sqrt(min_ei / (total_inertia * rod_len * rod_len * rod_len));
  const double drag = 1.0 / (1.0 + 2.0 * s.damping_ratio * omega1 * dt);

  s.nodes[0] = s.base_pose.position;
  vel[0] = Vec2{};
  for (std::size_t i = 1; i < n_nodes; ++i) {
    vel[i] = drag * (vel[i] + (dt / inertia[i]) * force[i]);
    s.nodes[i] += dt * vel[i];
  }
  // Follow-the-leader projection restores every segment length exactly.
  for (std::size_t i = 1; i < n_nodes; ++i) {
    const Vec2 d = s.nodes[i] - s.nodes[i - 1];
    const double dn = norm(d);
    const Vec2 dir = dn > 0.0 ? d / dn : unit_from_angle(s.base_pose.angle);
    s.nodes[i] = s.nodes[i - 1] + l * dir;
  }
  s.node_velocities[0] = s.base_velocity;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    vel[i] = (s.nodes[i] - carried[i]) / dt;
    s.node_velocities[i] = (s.nodes[i] - old[i]) / dt;
    const double speed = norm(s.node_velocities[i]);
    if (!(speed <= s.blowup_speed)) {
      std::ostringstream os;
      os << "sheet node " << i << " speed " << speed << " m/s exceeds blow-up threshold " << s.blowup_speed;
      throw SimulationAborted(os.str());
    }
  }
}

SheetState solve_deformation_step(SheetState state, std::span<const Vec2> external_forces, double dt) {
  advance_sheet(state, external_forces, dt);
  return state;
}

std::vector<double> joint_bend(const SheetState& s) {
  std::vector<double> out(s.segment_count());
  double prev = s.base_pose.angle;
  for (std::size_t j = 0; j < s.segment_count(); ++j) {
    const double a = angle_of(s.nodes[j + 1] - s.nodes[j]);
    out[j] = wrap_angle(a - prev) - s.rest_turn[j];
    prev = a;
  }
  return out;
}

double elastic_energy(const SheetState& s) {
  const auto bend = joint_bend(s);
  double e = 0.0;
  for (std::size_t j = 0; j < bend.size(); ++j) e += 0.5 * joint_stiffness(s, j) * bend[j] * bend[j];
  return e;
}

double kinetic_energy(const SheetState& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) e += 0.5 * s.node_mass[i] * norm2(s.node_velocities[i]);
  return e;
}

double max_segment_strain(const SheetState& s) {
  double worst = 0.0;
  for (std::size_t k = 0; k < s.segment_count(); ++k) {
    worst = std::max(worst, std::abs(norm(s.nodes[k + 1] - s.nodes[k]) / s.segment_rest_length - 1.0));
  }
  return worst;
}

double physical_stable_dt(const SheetState& s) {
  double max_ei = 0.0;
  for (double ei : s.effective_ei) max_ei = std::max(max_ei, ei);
  const double l = s.segment_rest_length;
  const double k_node = 10.0 * max_ei / (l * l * l) + s.contact_stiffness_hint;
  double min_mass = s.node_mass.empty() ? 0.0 : s.node_mass[1];
  for (std::size_t i = 1; i < s.node_mass.size(); ++i) min_mass = std::min(min_mass, s.node_mass[i]);
  return 2.0 * kStabilitySafety * std::sqrt(min_mass / k_node);
}

}  // namespace conescoop
