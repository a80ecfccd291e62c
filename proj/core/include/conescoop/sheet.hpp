#pragma once

// Cross-section of the end-effector as a clamped, inextensible elastic rod.
// Node 0 is driven kinematically by the base pose; the remaining nodes
// follow damped pseudo-dynamics with discrete bending springs. The cone's
// second generator is carried along as a rigid back wall hinged at the base.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conescoop/cone_geometry.hpp"
#include "conescoop/scene.hpp"
#include "conescoop/vec2.hpp"

namespace conescoop {

/// Raised when an integration blows up; carries a diagnostic message.
class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinSheetSegments = 8;

struct SheetState {
  /// Clamp position and heading of the clamped tangent.
  Pose2 base_pose;
  Vec2 base_velocity;
  double base_angular_velocity = 0.0;

  std::vector<Vec2> nodes;
  /// Total node velocities, including the rigid motion of the base.
  std::vector<Vec2> node_velocities;
  /// Base pose the nodes were last carried with, and node velocities
  /// relative to that moving frame.
  Pose2 frame_pose;
  std::vector<Vec2> deform_velocities;
  double segment_rest_length = 0.0;

  /// Bending stiffness EI of each segment (N m^2).
  std::vector<double> effective_ei;
  /// Rest turning angle per joint; joint 0 is the clamp, joint j >= 1 sits at node j.
  std::vector<double> rest_turn;
  /// Physical node masses (kg), used for gravity.
  std::vector<double> node_mass;

  double thickness = 0.0002;
  double friction_coefficient = 0.3;
  double stiffness_multiplier = 1.0;
  /// Width of the strip the 2D section stands for.
  double section_width = 0.0;

  /// Rigid back wall: length and signed angle from the base heading.
  double back_wall_length = 0.0;
  double back_wall_angle = 0.0;

  double damping_ratio = 0.7;
  /// Extra node stiffness from contacts, used to size the pseudo-masses.
  double contact_stiffness_hint = 0.0;
  double blowup_speed = 50.0;

  std::size_t segment_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  double length() const { return segment_rest_length * static_cast<double>(segment_count()); }
  const Vec2& tip() const { return nodes.back(); }
  /// Tip position of the rest shape under the current base pose.
  Vec2 undeformed_tip() const;
  Vec2 back_wall_tip() const;
  bool has_back_wall() const { return back_wall_length > 0.0; }
};

struct SheetBuildOptions {
  /// Gain of the hoop-curvature stiffening, 1 + c (2R/d - 1).
  double anisotropy_gain = 1.0;
  /// Strip width represented by the section; <= 0 means the bottom diameter.
  double section_width = 0.0;
  Pose2 base_pose;
  bool with_back_wall = true;
  double damping_ratio = 0.7;
};

/// Hoop-curvature stiffening of the generator: 1 + c (2R/d - 1).
double stiffness_multiplier(const ConeConfig& cone, double anisotropy_gain);

/// Straight rod of length R along the base heading. Rejects segments < 8.
SheetState build_sheet(const SheetSpec& sheet, const ConeConfig& cone, std::size_t segments,
                       const SheetBuildOptions& options = {});

struct LadleProfile {
  double width = 0.070;
  /// Sagitta of the circular-arc profile.
  double depth = 0.015;
  /// Distal length that keeps the plain (non-rigid) material stiffness.
  double compliant_tip_length = 0.005;
};

/// Rigid arc-shaped profile with a short compliant tip; no back wall. The
/// concave side faces the carrying side of the rod.
SheetState build_ladle(const SheetSpec& sheet, const LadleProfile& profile, std::size_t segments,
                       const Pose2& base_pose = {}, double damping_ratio = 0.7);

/// Moves the clamp to `pose` over `dt`, updating the base velocities.
void drive_base(SheetState& state, const Pose2& pose, double dt);

/// Advances the free nodes by one step of damped dynamics with bending
/// elasticity and exact inextensibility. `external_forces` has one entry per
/// node (entry 0 is ignored). Throws SimulationAborted on blow-up.
void advance_sheet(SheetState& state, std::span<const Vec2> external_forces, double dt);

SheetState solve_deformation_step(SheetState state, std::span<const Vec2> external_forces, double dt);

/// Turning angle at each joint relative to the rest shape.
std::vector<double> joint_bend(const SheetState& state);
double elastic_energy(const SheetState& state);
/// Kinetic energy with the physical node masses.
double kinetic_energy(const SheetState& state);
/// Largest relative deviation of a segment length from its rest length.
double max_segment_strain(const SheetState& state);
/// Largest stable step for the rod's physical masses; advance_sheet scales
/// pseudo-masses so any dt works, this reports the unscaled bound.
double physical_stable_dt(const SheetState& state);

}  // namespace conescoop
