#pragma once

// Open-loop scooping motion of the tool base. The tool is described by the
// chord from the base to its free tip and by the vertex angle of the V it
// forms with the back wall (pi for a single curved blade such as a ladle).

#include <string>
#include <vector>

#include "conescoop/cone_geometry.hpp"
#include "conescoop/scene.hpp"
#include "conescoop/vec2.hpp"

namespace conescoop {

struct ToolGeometry {
  /// Base-to-tip distance of the undeformed tool.
  double length = 0.05;
  /// Angle between the leading blade and the back wall.
  double vertex_angle = std::numbers::pi / 2.0;
  double back_length = 0.05;
  /// Bulge of a curved blade to the left of its chord (circular arc).
  double sagitta = 0.0;

  /// Blade point at fraction u of the chord, in the tool frame.
  Vec2 blade_point(double u) const;
  /// Angle from the tip tangent back to the chord.
  double tip_turn() const;

  static ToolGeometry from_cone(const ConeConfig& cone);
};

struct PlateTarget {
  double center_x = -0.12;
  double surface_y = 0.0;
};

struct TrajectoryParams {
  /// Interference of the undeformed tip into the wall during the sweep.
  double penetration_offset = 0.001;
  /// Bound on the linear speed of the base in every phase.
  double sweep_speed = 0.15;
  double max_angular_rate = 6.0;
  /// Lower bound on the blade's angle to the wall tangent; raised as needed
  /// so the base clears the wall.
  double attack_angle = deg_to_rad(30.0);
  double attack_margin = deg_to_rad(3.0);
  double frame_clearance = 0.003;
  /// Lowest allowed slope of the back wall near the exit (negative = down).
  double lip_angle = deg_to_rad(-15.0);
  double entry_margin = deg_to_rad(4.0);
  double exit_margin = deg_to_rad(6.0);
  double sweep_step = deg_to_rad(1.0);
  double approach_clearance = 0.015;
  double insert_standoff = 0.004;
  double retract = 0.002;
  double lift_clearance = 0.01;
  PlateTarget plate;
  double dump_clearance = 0.008;
  int shake_cycles = 3;
  double shake_amplitude = 0.002;
};

struct TrajectoryPhase {
  std::string label;
  std::vector<Pose2> waypoints;
  /// Absolute time of each waypoint.
  std::vector<double> times;
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

struct TrajectoryPlan {
  std::vector<TrajectoryPhase> phases;
  double penetration_offset = 0.0;
  double sweep_speed = 0.0;
  double attack_angle = 0.0;
  ToolGeometry tool;
  Pose2 dump_pose;

  double total_duration() const;
  const TrajectoryPhase& phase(const std::string& label) const;
  /// Undeformed tip for a base pose.
  Vec2 tip_of(const Pose2& pose) const { return pose.position + tool.length * unit_from_angle(pose.angle); }
};

/// Throws std::runtime_error when no attack angle keeps the base clear of
/// the wall, std::invalid_argument on bad parameters.
TrajectoryPlan plan_scoop(const ContainerSpec& container, const ToolGeometry& tool, const TrajectoryParams& params);
TrajectoryPlan plan_scoop(const ContainerSpec& container, const ConeConfig& cone, const TrajectoryParams& params);

/// Linear position and shortest-arc heading between waypoints. Throws
/// std::domain_error outside [0, total].
Pose2 pose_at(const TrajectoryPlan& plan, double t);

/// Label of the phase active at time t.
const std::string& phase_at(const TrajectoryPlan& plan, double t);

/// Waypoint table as CSV: t, x_mm, y_mm, angle_deg, phase.
void write_plan_csv(const TrajectoryPlan& plan, const std::string& path);

}  // namespace conescoop
