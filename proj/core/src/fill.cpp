#include "conescoop/fill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conescoop {

ContactParams contact_params_for(const GranularSpec& g) {
  ContactParams cp;
  cp.normal_stiffness = g.normal_stiffness;
  cp.damping_ratio = g.restitution_damping;
  cp.friction = g.friction_coefficient;
  return cp;
}

bool settle(ParticleWorld& world, double speed, double min_time, std::size_t max_steps) {
  const double t_end = world.sim_time + min_time;
  for (std::size_t k = 0; k < max_steps; ++k) {
    step(world);
    // Checking every step is wasteful; every 50 steps is plenty.
    if (k % 50 == 49 && world.sim_time >= t_end && max_particle_speed(world) < speed) return true;
  }
  return false;
}

ParticleWorld fill_and_settle(const ContainerSpec& container, const GranularSpec& granular, std::uint64_t seed,
                              const FillOptions& opt) {
  container.validate();
  granular.validate();
  ParticleWorld w;
  w.container = container;
  w.dt = opt.dt;
  w.rng_seed = seed;
  w.contact = contact_params_for(granular);
  w.contact.wall_stiffness_factor = opt.wall_stiffness_factor;

  const double m_mean = granular.mean_particle_mass();
  const auto count = static_cast<std::size_t>(std::llround(granular.total_mass / m_mean));
  if (count == 0) return w;
  if (count > opt.max_particles) {
    std::ostringstream os;
    os << granular.material_name << ": " << count << " particles needed for " << granular.total_mass * 1e3
       << " g, above the limit of " << opt.max_particles;
    throw std::runtime_error(os.str());
  }

  std::mt19937_64 rng(seed);
  w.radius.resize(count);
  for (double& r : w.radius) {
    r = granular.particle_radius_mean * (1.0 + granular.particle_radius_spread * (2.0 * unit_uniform(rng) - 1.0));
  }
  double sum = 0.0;
  w.mass.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    w.mass[i] = granular.particle_density * std::numbers::pi * w.radius[i] * w.radius[i];
    sum += w.mass[i];
  }
  for (double& m : w.mass) m *= granular.total_mass / sum;

  // Hex lattice in the lower bowl, filled bottom row first.
  const double r_max = granular.max_radius();
  const double pitch = 2.0 * r_max * opt.lattice_pitch;
  const double row = pitch * std::sqrt(3.0) / 2.0;
  const Vec2 low = container.lowest_point();
  const double r = container.radius();
  std::vector<Vec2> sites;
  for (int iy = 0; sites.size() < count; ++iy) {
    const double y = low.y + r_max + iy * row;
    if (y > container.center.y + r) break;
    const double x0 = container.center.x - r + ((iy % 2) ? 0.5 * pitch : 0.0);
    for (double x = x0; x <= container.center.x + r; x += pitch) {
      const Vec2 p{x, y};
      if (!in_bowl_interior(container, p)) continue;
      if (container_sdf(container, p).distance < 1.2 * r_max) continue;
      sites.push_back(p);
      if (sites.size() == count) break;
    }
  }
  if (sites.size() < count) {
    throw std::runtime_error(granular.material_name + ": powder does not fit in container " + container.label);
  }
  w.position = sites;
  w.velocity.assign(count, Vec2{});
  w.validate();

  const auto fail = [&](const char* stage) {
    std::ostringstream os;
    os << "settling did not converge during " << stage << " within " << opt.max_settle_steps
       << " steps (max speed " << max_particle_speed(w) << " m/s)";
    throw std::runtime_error(os.str());
  };
  if (!settle(w, opt.settle_speed, opt.min_settle_time, opt.max_settle_steps)) fail("deposit");

  // Leveling shake applied as a horizontal pseudo-force.
  const double omega = 2.0 * std::numbers::pi * opt.shake_frequency;
  const double t0 = w.sim_time;
  while (w.sim_time - t0 < opt.shake_duration) {
    const double t = w.sim_time - t0;
    w.frame_acceleration = {-opt.shake_amplitude * omega * omega * std::sin(omega * t), 0.0};
    step(w);
  }
  w.frame_acceleration = {};
  if (!settle(w, opt.settle_speed, opt.min_settle_time, opt.max_settle_steps)) fail("leveling");

  for (std::size_t i = 0; i < count; ++i) {
    if (!in_bowl_interior(container, w.position[i])) {
      throw std::runtime_error(granular.material_name + ": particle left the bowl while settling in " +
                               container.label);
    }
  }
  w.sim_time = 0.0;
  w.stats = {};
  return w;
}

}  // namespace conescoop
