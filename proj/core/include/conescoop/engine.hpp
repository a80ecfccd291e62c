#pragma once

// 2D DEM core: disc particles with linear spring-dashpot normal contacts and
// regularized Coulomb friction, a spatial-hash broadphase, and two-way
// coupling with the end-effector rod. Fixed dt, fully deterministic.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "conescoop/scene.hpp"
#include "conescoop/sheet.hpp"
#include "conescoop/vec2.hpp"

namespace conescoop {

/// Capsule-shaped static boundary (floor, plate tray).
struct StaticSegment {
  Vec2 a;
  Vec2 b;
  double radius = 0.0;
};

struct ContactParams {
  double normal_stiffness = 800.0;
  double damping_ratio = 0.5;
  double friction = 0.5;
  /// Container wall contacts use a stiffer spring.
  double wall_stiffness_factor = 15.0;
  double wall_damping_ratio = 0.9;
  /// Rigid scene fixtures (floor, plate) take the hardest landings.
  double static_stiffness_factor = 15.0;
  /// Grains caught between tool and wall need the tool side hard too.
  double tool_stiffness_factor = 15.0;
  /// Tangential regularization slope, in units of 2 sqrt(k m).
  double tangential_gain = 1.0;
  /// Rod node against the container wall.
  double sheet_wall_stiffness = 5000.0;
  double sheet_wall_damping_ratio = 1.0;

  double wall_stiffness() const { return normal_stiffness * wall_stiffness_factor; }
  double static_stiffness() const { return normal_stiffness * static_stiffness_factor; }
  double tool_stiffness() const { return normal_stiffness * tool_stiffness_factor; }
};

struct EngineStats {
  /// Largest particle-boundary overlap divided by the particle radius.
  double max_boundary_penetration = 0.0;
  // Same, split by boundary: container wall, static segments, tool.
  double max_penetration_container = 0.0;
  double max_penetration_static = 0.0;
  double max_penetration_tool = 0.0;
  /// Largest |F_t| - mu |F_n| seen at any contact.
  double max_coulomb_excess = 0.0;
  std::uint64_t steps = 0;
};

struct ParticleWorld {
  std::vector<Vec2> position;
  std::vector<Vec2> velocity;
  std::vector<double> radius;
  std::vector<double> mass;

  std::optional<ContainerSpec> container;
  std::vector<StaticSegment> statics;
  std::optional<SheetState> sheet;

  double sim_time = 0.0;
  double dt = 2e-5;
  Vec2 gravity{0.0, -9.81};
  /// Acceleration of the lab frame; particles feel -m a (used for shaking).
  Vec2 frame_acceleration{};
  ContactParams contact;
  std::uint64_t rng_seed = 0;
  double blowup_speed = 10.0;
  EngineStats stats;

  std::size_t size() const { return position.size(); }
  /// Throws std::invalid_argument on mismatched arrays, bad radii/masses,
  /// a dt above stable_dt() or above boundary_stable_dt().
  void validate() const;
};

/// 0.2 sqrt(m_min / k_n), the particle-particle bound.
double stable_dt(const ParticleWorld& world);
/// 0.5 / omega for the stiffest boundary spring on the lightest particle.
/// Boundary springs are heavily damped, so this looser bound suffices.
double boundary_stable_dt(const ParticleWorld& world);

/// One semi-implicit Euler step. The rod base must already be driven to the
/// pose for the end of the step. Throws SimulationAborted on blow-up.
void step(ParticleWorld& world);

double total_particle_mass(const ParticleWorld& world);
double particle_kinetic_energy(const ParticleWorld& world);
double max_particle_speed(const ParticleWorld& world);

/// Net contact force on each particle from boundaries only (no gravity).
std::vector<Vec2> boundary_forces(const ParticleWorld& world);

struct PlateZone {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  bool contains(const Vec2& p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

struct MeasureRegions {
  std::optional<ContainerSpec> bowl;
  std::optional<PlateZone> plate;
  /// Distance from the rod or back wall within which a particle counts as carried.
  double capture_distance = 0.002;
};

struct MassAccounting {
  double total_mass = 0.0;
  double residue = 0.0;
  double carried = 0.0;
  double delivered = 0.0;
  double spilled = 0.0;
  double sum() const { return residue + carried + delivered + spilled; }
};

/// Carried mask for every particle: inside the scoop polygon or close to the tool.
std::vector<bool> carried_mask(const ParticleWorld& world, double capture_distance);

/// Mass fractions; precedence carried > delivered > residue > spilled.
/// Zero total mass gives all zeros.
MassAccounting measure(const ParticleWorld& world, const MeasureRegions& regions);

/// Appends frames (time, particle and rod node positions) as CSV rows:
/// t, kind, index, x_mm, y_mm.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write_frame(const ParticleWorld& world);

 private:
  std::ofstream out_;
};

}  // namespace conescoop
