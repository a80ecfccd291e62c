#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "conescoop/engine.hpp"
#include "conescoop/scene.hpp"
#include "conescoop/sheet.hpp"

namespace conescoop::oracle {

double Comparison::relative_error() const { return std::abs(simulated - expected) / std::abs(expected); }

namespace {

ParticleWorld single(double radius, double mass) {
  ParticleWorld w;
  w.position = {{0.0, 0.0}};
  w.velocity = {{0.0, 0.0}};
  w.radius = {radius};
  w.mass = {mass};
  return w;
}

}  // namespace

Comparison free_fall(double duration) {
  ParticleWorld w = single(0.0005, 5.5e-5);
  w.validate();
  const auto steps = static_cast<long>(std::llround(duration / w.dt));
  for (long i = 0; i < steps; ++i) step(w);
  return {-w.position[0].y, 0.5 * 9.81 * duration * duration};
}

double momentum_drift() {
  ParticleWorld w;
  w.gravity = {};
  w.contact.damping_ratio = 0.0;
  w.contact.friction = 0.0;
  w.position = {{-0.002, 0.0}, {0.002, 0.0}};
  w.velocity = {{0.3, 0.0}, {-0.1, 0.0}};
  w.radius = {0.0005, 0.0006};
  w.mass = {5.5e-5, 8.0e-5};
  w.validate();
  auto momentum = [&] { return w.mass[0] * w.velocity[0] + w.mass[1] * w.velocity[1]; };
  const double scale = w.mass[0] * norm(w.velocity[0]) + w.mass[1] * norm(w.velocity[1]);
  const Vec2 p0 = momentum();
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    step(w);
    worst = std::max(worst, norm(momentum() - p0) / scale);
  }
  return worst;
}

Comparison resting_force() {
  ParticleWorld w = single(0.0005, 5.5e-5);
  w.statics.push_back({{-0.01, -0.0006}, {0.01, -0.0006}, 0.0001});
  w.validate();
  for (int i = 0; i < 50000; ++i) step(w);
  const auto f = boundary_forces(w);
  return {f[0].y, w.mass[0] * 9.81};
}

Comparison cantilever(const std::string& sheet_preset_name, double tip_load, std::size_t segments) {
  const ConeConfig cone = ConeConfig::from_bottom_diameter(0.05, 0.08);
  SheetState s = build_sheet(sheet_preset(sheet_preset_name), cone, segments, {.anisotropy_gain = 0.0});
  const double ei = s.effective_ei.front();
  const double length = s.length();
  std::vector<Vec2> load(s.nodes.size());
  load.back() = {0.0, -tip_load};
  const double dt = 2e-5;
  double prev = 0.0;
  for (int i = 0; i < 2000000; ++i) {
    advance_sheet(s, load, dt);
    if (i % 5000 == 4999) {
      const double y = -s.tip().y;
      if (std::abs(y - prev) < 1e-7 * std::max(1e-9, std::abs(y))) break;
      prev = y;
    }
  }
  return {-s.tip().y, tip_load * length * length * length / (3.0 * ei)};
}

}  // namespace conescoop::oracle
