#include "conescoop/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace conescoop {

namespace {

constexpr double kRotationStep = deg_to_rad(5.0);
constexpr double kMinSegmentTime = 1e-3;

struct ToolPoints {
  Vec2 base, tip, back;
};

ToolPoints tool_points(const ToolGeometry& tool, const Pose2& pose) {
  return {pose.position, pose.position + tool.length * unit_from_angle(pose.angle),
          pose.position + tool.back_length * unit_from_angle(pose.angle - tool.vertex_angle)};
}

Vec2 centroid(const ToolPoints& p) { return (p.base + p.tip + p.back) / 3.0; }

double min_y(const ToolPoints& p) { return std::min({p.base.y, p.tip.y, p.back.y}); }

Pose2 translated(const Pose2& p, const Vec2& d) { return {p.position + d, p.angle}; }

Pose2 rotated_about(const Pose2& p, const Vec2& pivot, double angle) {
  return {pivot + rotated(p.position - pivot, angle), p.angle + angle};
}

// Base and the proximal part of the blade must stay clear of the wall.
bool frame_clear(const ContainerSpec& c, const ToolGeometry& tool, const Vec2& base, const Vec2& tip,
                 double clearance) {
  const Vec2 along = (tip - base) / tool.length;
  const Vec2 left = perp(along);
  // Spacing under half the wall thickness so a long blade cannot skip across it.
  const double reach = 0.7;
  const int n = std::max(7, static_cast<int>(std::ceil(reach * tool.length / (0.4 * c.wall_thickness))));
  for (int k = 0; k <= n; ++k) {
    const Vec2 q = tool.blade_point(reach * k / n);
    if (container_sdf(c, base + q.x * along + q.y * left).distance < clearance) return false;
  }
  // Distal part may sit in the wall at the tip, but must not cut through it elsewhere.
  const int m = static_cast<int>(std::ceil((1.0 - reach) * tool.length / (0.4 * c.wall_thickness)));
  bool left_contact = false;
  for (int k = 0; k <= m; ++k) {
    const Vec2 q = tool.blade_point(1.0 - (1.0 - reach) * k / m);
    const double d = container_sdf(c, base + q.x * along + q.y * left).distance;
    if (d > clearance) left_contact = true;
    if (left_contact && d < 0.0) return false;
  }
  return true;
}

void append_rotation(std::vector<Pose2>& out, const Vec2& pivot, double total) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(total) / kRotationStep)));
  const Pose2 start = out.back();
  for (int k = 1; k <= steps; ++k) out.push_back(rotated_about(start, pivot, total * k / steps));
}

// Nearest representative of `target` (mod 2pi) to `from`.
double nearest_branch(double from, double target) { return from + wrap_angle(target - from); }

void assign_times(std::vector<TrajectoryPhase>& phases, double speed, double rate) {
  double t = 0.0;
  Pose2 prev = phases.front().waypoints.front();
  for (auto& ph : phases) {
    ph.times.clear();
    for (const Pose2& p : ph.waypoints) {
      const double lin = norm(p.position - prev.position);
      const double ang = std::abs(wrap_angle(p.angle - prev.angle));
      if (lin > 0.0 || ang > 0.0) t += std::max({lin / speed, ang / rate, kMinSegmentTime});
      ph.times.push_back(t);
      prev = p;
    }
  }
}

}  // namespace

Vec2 ToolGeometry::blade_point(double u) const {
  const double x = u * length;
  if (!(sagitta > 0.0)) return {x, 0.0};
  const double half = 0.5 * length;
  const double radius = (half * half + sagitta * sagitta) / (2.0 * sagitta);
  return {x, std::sqrt(radius * radius - (x - half) * (x - half)) - (radius - sagitta)};
}

double ToolGeometry::tip_turn() const {
  if (!(sagitta > 0.0)) return 0.0;
  const double half = 0.5 * length;
  return std::asin(half / ((half * half + sagitta * sagitta) / (2.0 * sagitta)));
}

ToolGeometry ToolGeometry::from_cone(const ConeConfig& cone) {
  return {cone.sheet_radius(), cone.vertex_angle(), cone.sheet_radius()};
}

double TrajectoryPlan::total_duration() const { return phases.empty() ? 0.0 : phases.back().times.back(); }

const TrajectoryPhase& TrajectoryPlan::phase(const std::string& label) const {
  for (const auto& p : phases) {
    if (p.label == label) return p;
  }
  throw std::out_of_range("no phase '" + label + "' in plan");
}

TrajectoryPlan plan_scoop(const ContainerSpec& container, const ConeConfig& cone, const TrajectoryParams& params) {
  return plan_scoop(container, ToolGeometry::from_cone(cone), params);
}

TrajectoryPlan plan_scoop(const ContainerSpec& c, const ToolGeometry& tool, const TrajectoryParams& prm) {
  c.validate();
  if (!(tool.length > 0.0) || !(tool.vertex_angle > 0.0) || tool.vertex_angle > std::numbers::pi + 1e-12) {
    throw std::invalid_argument("tool geometry needs length > 0 and vertex angle in (0, pi]");
  }
  if (!(prm.penetration_offset >= 0.0) || prm.penetration_offset >= 0.5 * c.wall_thickness) {
    throw std::invalid_argument("penetration offset must lie in [0, wall_thickness/2)");
  }
  if (!(prm.sweep_speed > 0.0) || !(prm.max_angular_rate > 0.0)) {
    throw std::invalid_argument("sweep speed and angular rate must be positive");
  }
  if (!(prm.sweep_step > 0.0)) throw std::invalid_argument("sweep step must be positive");

  const double r_tip = c.radius() + prm.penetration_offset;
  const double psi_in = c.lower_rim_angle() - prm.entry_margin;
  double psi_out = c.lower_rim_angle() - 2.0 * c.cap_half_angle() + prm.exit_margin;
  if (!(psi_out < psi_in)) throw std::invalid_argument("entry and exit margins leave no sweep arc");
  const Vec2 low = c.lowest_point() - c.center;
  const double psi_low = nearest_branch(psi_in, std::atan2(low.y, low.x));

  constexpr double kMaxAttack = deg_to_rad(89.5);
  auto tip_at = [&](double psi) { return c.center + r_tip * unit_from_angle(psi); };
  auto base_for = [&](const Vec2& tip, double heading) { return tip - tool.length * unit_from_angle(heading); };
  // Chord heading that puts the tip tangent at attack angle `a` to the wall.
  auto chord_heading = [&](double psi, double a) { return psi - std::numbers::pi / 2.0 + a + tool.tip_turn(); };

  auto min_clear_attack = [&](double psi) {
    const Vec2 tip = tip_at(psi);
    double a = prm.attack_angle;
    while (a <= kMaxAttack && !frame_clear(c, tool, base_for(tip, chord_heading(psi, a)), tip,
                                           prm.frame_clearance)) {
      a += deg_to_rad(0.25);
    }
    return a;
  };

  // Smallest attack angle that keeps the frame clear everywhere on the arc.
  // A tool too long for the far wall leaves early, once past the bottom.
  {
    const int n = std::max(2, static_cast<int>(std::ceil((psi_in - psi_out) / prm.sweep_step)));
    double last_ok = psi_in;
    for (int k = 0; k <= n; ++k) {
      const double psi = psi_in - (psi_in - psi_out) * k / n;
      if (min_clear_attack(psi) > kMaxAttack) {
        if (psi < psi_low) {
          psi_out = last_ok;
          break;
        }
        std::ostringstream os;
        os << "frame collision: no attack angle keeps the tool base clear of " << c.label << " at polar angle "
           << rad_to_deg(psi) << " deg (tool length " << tool.length * 1e3 << " mm)";
        throw std::runtime_error(os.str());
      }
      last_ok = psi;
    }
  }
  const int n_sweep = std::max(2, static_cast<int>(std::ceil((psi_in - psi_out) / prm.sweep_step)));
  std::vector<double> psis(n_sweep + 1), need(n_sweep + 1);
  for (int k = 0; k <= n_sweep; ++k) {
    psis[k] = psi_in - (psi_in - psi_out) * k / n_sweep;
    need[k] = min_clear_attack(psis[k]);
  }
  const double global = std::min(*std::max_element(need.begin(), need.end()) + prm.attack_margin, kMaxAttack);
  auto clear_at = [&](int k, double a) {
    const Vec2 tip = tip_at(psis[k]);
    return frame_clear(c, tool, base_for(tip, chord_heading(psis[k], a)), tip, prm.frame_clearance);
  };
  // One attack angle for the whole arc when it fits; otherwise a
  // non-decreasing schedule (long tools steepen towards the exit).
  std::vector<double> attack(n_sweep + 1, global);
  bool uniform = true;
  for (int k = 0; k <= n_sweep && uniform; ++k) uniform = clear_at(k, global);
  if (!uniform) {
    double run = prm.attack_angle;
    for (int k = 0; k <= n_sweep; ++k) {
      run = std::max(run, need[k]);
      const double a = std::min(run + prm.attack_margin, kMaxAttack);
      attack[k] = clear_at(k, a) ? a : need[k];
    }
  }

  // Sweep: tip on the arc, heading raised near the exit so the back wall
  // never slopes down more than the lip angle.
  const double heading_floor = tool.vertex_angle + prm.lip_angle - 2.0 * std::numbers::pi;
  std::vector<Pose2> sweep;
  for (int k = 0; k <= n_sweep; ++k) {
    const Vec2 tip = tip_at(psis[k]);
    const double natural = chord_heading(psis[k], attack[k]);
    double h = std::max(natural, heading_floor);
    while (h > natural && !frame_clear(c, tool, base_for(tip, h), tip, prm.frame_clearance)) {
      h = std::max(natural, h - deg_to_rad(0.5));
    }
    if (!frame_clear(c, tool, base_for(tip, h), tip, prm.frame_clearance)) {
      throw std::runtime_error("frame collision near the exit of " + c.label);
    }
    sweep.push_back({base_for(tip, h), h});
  }

  const double top = c.top_y();
  // Approach from above and to the side, hovering over the entry point.
  const Vec2 in_normal = -unit_from_angle(psi_in);
  const Pose2 pre_insert = translated(sweep.front(), (prm.insert_standoff + prm.penetration_offset) * in_normal);
  const double rise = std::max(0.0, top + prm.approach_clearance - min_y(tool_points(tool, pre_insert)));
  const Pose2 hover = translated(pre_insert, {0.0, rise});
  const Pose2 start = translated(hover, {0.03, 0.02});

  std::vector<TrajectoryPhase> phases;
  phases.push_back({"approach", {start, hover}, {}});
  phases.push_back({"insert", {hover, pre_insert, sweep.front()}, {}});
  phases.push_back({"sweep", sweep, {}});

  // Lift: back off the wall, turn about the tip until the mouth faces up,
  // leave the cap along its axis, then rise above the rim.
  std::vector<Pose2> lift{sweep.back()};
  const Vec2 out_normal = -unit_from_angle(psi_out);
  lift.push_back(translated(lift.back(), (prm.penetration_offset + prm.retract) * out_normal));
  const double mouth_up = std::numbers::pi / 2.0 + tool.vertex_angle / 2.0;
  const double turn = nearest_branch(lift.back().angle, mouth_up) - lift.back().angle;
  append_rotation(lift, tool_points(tool, lift.back()).tip, turn);
  const Vec2 axis = c.opening_axis();
  {
    const ToolPoints tp = tool_points(tool, lift.back());
    const double rim_plane = -(c.radius() - c.rim_depth);
    const double lowest = std::min({dot(tp.base - c.center, axis), dot(tp.tip - c.center, axis),
                                    dot(tp.back - c.center, axis)});
    const double along = std::max(0.0, rim_plane + prm.lift_clearance - lowest);
    if (along > 0.0) lift.push_back(translated(lift.back(), along * axis));
  }
  {
    const double up = std::max(0.0, top + prm.lift_clearance - min_y(tool_points(tool, lift.back())));
    if (up > 0.0) lift.push_back(translated(lift.back(), {0.0, up}));
  }
  phases.push_back({"lift", lift, {}});

  // Dump: carry over the plate, turn the mouth down about the tool centroid, shake.
  std::vector<Pose2> dump{lift.back()};
  const ToolPoints tp = tool_points(tool, dump.back());
  const Vec2 cen = centroid(tp);
  const double reach = std::max({norm(tp.base - cen), norm(tp.tip - cen), norm(tp.back - cen)});
  const double dump_y = std::max(prm.plate.surface_y, top) + prm.dump_clearance + reach;
  if (cen.y < dump_y) dump.push_back(translated(dump.back(), {0.0, dump_y - cen.y}));
  const double transit_y = std::max(cen.y, dump_y);
  dump.push_back(translated(dump.back(), {prm.plate.center_x - cen.x, 0.0}));
  if (transit_y > dump_y) dump.push_back(translated(dump.back(), {0.0, dump_y - transit_y}));
  const Vec2 pivot{prm.plate.center_x, dump_y};
  append_rotation(dump, pivot, -std::numbers::pi);
  const Pose2 settled = dump.back();
  for (int k = 0; k < prm.shake_cycles; ++k) {
    dump.push_back(translated(settled, {prm.shake_amplitude, 0.0}));
    dump.push_back(translated(settled, {-prm.shake_amplitude, 0.0}));
  }
  dump.push_back(settled);
  phases.push_back({"dump", dump, {}});

  assign_times(phases, prm.sweep_speed, prm.max_angular_rate);

  TrajectoryPlan plan;
  plan.phases = std::move(phases);
  plan.penetration_offset = prm.penetration_offset;
  plan.sweep_speed = prm.sweep_speed;
  plan.attack_angle = *std::max_element(attack.begin(), attack.end());
  plan.tool = tool;
  plan.dump_pose = settled;
  return plan;
}

Pose2 pose_at(const TrajectoryPlan& plan, double t) {
  const double total = plan.total_duration();
  if (!(t >= 0.0) || t > total || plan.phases.empty()) {
    std::ostringstream os;
    os << "time " << t << " s outside plan duration [0, " << total << "]";
    throw std::domain_error(os.str());
  }
  for (const auto& ph : plan.phases) {
    if (t > ph.times.back()) continue;
    const auto it = std::lower_bound(ph.times.begin(), ph.times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ph.times.begin());
    if (j == 0) return ph.waypoints.front();
    const double t0 = ph.times[j - 1];
    const double t1 = ph.times[j];
    if (!(t1 > t0)) return ph.waypoints[j];
    const double u = (t - t0) / (t1 - t0);
    const Pose2& a = ph.waypoints[j - 1];
    const Pose2& b = ph.waypoints[j];
    return {a.position + u * (b.position - a.position), a.angle + u * wrap_angle(b.angle - a.angle)};
  }
  return plan.phases.back().waypoints.back();
}

const std::string& phase_at(const TrajectoryPlan& plan, double t) {
  for (const auto& ph : plan.phases) {
    if (t <= ph.times.back()) return ph.label;
  }
  return plan.phases.back().label;
}

void write_plan_csv(const TrajectoryPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plan to '" + path + "'");
  out << "t,x_mm,y_mm,angle_deg,phase\n" << std::fixed << std::setprecision(6);
  for (const auto& ph : plan.phases) {
    for (std::size_t k = 0; k < ph.waypoints.size(); ++k) {
      const Pose2& p = ph.waypoints[k];
      out << ph.times[k] << ',' << p.position.x * 1e3 << ',' << p.position.y * 1e3 << ','
          << rad_to_deg(p.angle) << ',' << ph.label << '\n';
    }
  }
}

}  // namespace conescoop
