#pragma once

#include <cstdint>
#include <random>

#include "conescoop/engine.hpp"
#include "conescoop/scene.hpp"

namespace conescoop {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct FillOptions {
  double dt = 2e-5;
  std::size_t max_particles = 5000;
  /// Settled once the fastest particle is slower than this (m/s).
  double settle_speed = 0.01;
  double min_settle_time = 0.25;
  std::size_t max_settle_steps = 250000;
  /// Horizontal leveling shake: amplitude (m), frequency (Hz), duration (s).
  double shake_amplitude = 0.0003;
  double shake_frequency = 30.0;
  double shake_duration = 0.2;
  /// Lattice pitch of the initial deposit, in maximum particle diameters.
  double lattice_pitch = 1.1;
  double wall_stiffness_factor = 15.0;
};

ContactParams contact_params_for(const GranularSpec& granular);

/// Deposits the powder on a loose lattice in the bowl, lets it fall and
/// settle, levels it with a short shake, then settles again. Throws
/// std::runtime_error when settling does not converge or the powder does not
/// fit in the bowl.
ParticleWorld fill_and_settle(const ContainerSpec& container, const GranularSpec& granular, std::uint64_t seed,
                              const FillOptions& options = {});

/// Steps until the fastest particle is below `speed` and at least `min_time`
/// has passed. Returns false if `max_steps` ran out first.
bool settle(ParticleWorld& world, double speed, double min_time, std::size_t max_steps);

}  // namespace conescoop
