#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "conescoop/fill.hpp"
#include "conescoop/scene.hpp"

namespace cs = conescoop;

namespace {

std::vector<cs::Vec2> random_points(const cs::ContainerSpec& c, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cs::Vec2> out;
  while (static_cast<int>(out.size()) < n) {
    const cs::Vec2 p = c.center + 0.6 * c.inner_diameter * cs::Vec2{u(rng), u(rng)};
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Scene, SdfAtCenterAndOnSurface) {
  const auto c = cs::make_container(0.110);
  EXPECT_NEAR(cs::container_sdf(c, c.center).distance, 0.055, 1e-12);
  const cs::Vec2 bottom = c.center - c.radius() * c.opening_axis();
  EXPECT_NEAR(cs::container_sdf(c, bottom).distance, 0.0, 1e-9);
  const auto s = cs::container_sdf(c, c.center - 0.02 * c.opening_axis());
  EXPECT_NEAR(cs::norm(s.normal), 1.0, 1e-12);
  // Inward normal at a point near the bottom points back toward the centre.
  EXPECT_GT(cs::dot(s.normal, c.opening_axis()), 0.99);
}

TEST(Scene, SdfGradientMatchesFiniteDifference) {
  const auto c = cs::make_container(0.083);
  int checked = 0;
  for (const auto& p : random_points(c, 400, 3)) {
    if (!cs::in_bowl_interior(c, p) || cs::container_sdf(c, p).distance < 1e-3) continue;
    const double h = 1e-7;
    const double gx = (cs::container_sdf(c, p + cs::Vec2{h, 0}).distance -
                       cs::container_sdf(c, p - cs::Vec2{h, 0}).distance) / (2 * h);
    const double gy = (cs::container_sdf(c, p + cs::Vec2{0, h}).distance -
                       cs::container_sdf(c, p - cs::Vec2{0, h}).distance) / (2 * h);
    const auto s = cs::container_sdf(c, p);
    ASSERT_NEAR(gx, s.normal.x, 1e-6);
    ASSERT_NEAR(gy, s.normal.y, 1e-6);
    if (++checked == 100) break;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Scene, SdfIsLipschitz) {
  const auto c = cs::make_container(0.067);
  const auto a = random_points(c, 500, 11), b = random_points(c, 500, 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lhs = std::abs(cs::container_sdf(c, a[i]).distance - cs::container_sdf(c, b[i]).distance);
    ASSERT_LE(lhs, cs::norm(a[i] - b[i]) + 1e-12);
  }
}

TEST(Scene, CachedGeometryMatchesFreeFunction) {
  const auto c = cs::make_container(0.093, {0.01, 0.02});
  const cs::ContainerGeometry g(c);
  for (const auto& p : random_points(c, 300, 5)) {
    const auto a = g.sdf(p), b = cs::container_sdf(c, p);
    ASSERT_EQ(a.distance, b.distance);
    ASSERT_EQ(a.normal, b.normal);
  }
}

TEST(Scene, SpecValidation) {
  auto c = cs::make_container(0.11);
  EXPECT_NO_THROW(c.validate());
  c.tilt_angle = cs::deg_to_rad(90.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = cs::make_container(0.11);
  c.rim_depth = 0.06;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  auto g = cs::granular_preset("flour");
  g.particle_radius_spread = 0.5;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  auto s = cs::sheet_preset("pp_sheet");
  s.thickness = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Scene, UnknownPresetListsAlternatives) {
  try {
    cs::granular_preset("sugar");
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("flour"), std::string::npos);
    EXPECT_NE(msg.find("rice"), std::string::npos);
  }
  try {
    cs::sheet_preset("cardboard");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("sus304_sheet"), std::string::npos);
  }
}

TEST(Scene, PresetsKeepGrainSizeOrder) {
  const auto f = cs::granular_preset("flour"), co = cs::granular_preset("coffee"), r = cs::granular_preset("rice");
  EXPECT_LT(f.particle_radius_mean, co.particle_radius_mean);
  EXPECT_LT(co.particle_radius_mean, r.particle_radius_mean);
  for (const auto& g : {f, co, r}) EXPECT_DOUBLE_EQ(g.total_mass, 0.010);
}

TEST(Scene, FillSettlesInsideBowlDeterministically) {
  const auto c = cs::make_container(0.067);
  const auto g = cs::granular_preset("flour");
  const auto a = cs::fill_and_settle(c, g, 7);
  const auto b = cs::fill_and_settle(c, g, 7);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GT(a.size(), 0u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a.position[i], b.position[i]);
    ASSERT_EQ(a.velocity[i], b.velocity[i]);
    ASSERT_TRUE(cs::in_bowl_interior(c, a.position[i])) << i;
  }
  const double mean_mass = cs::total_particle_mass(a) / static_cast<double>(a.size());
  EXPECT_NEAR(cs::total_particle_mass(a), g.total_mass, mean_mass);

  // Free surface roughly level: top particles within a few diameters of each other.
  double top = -1e9;
  for (const auto& p : a.position) top = std::max(top, p.y);
  double lo_x = 1e9, hi_x = -1e9;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.position[i].y > top - 2.0 * g.max_radius()) {
      lo_x = std::min(lo_x, a.position[i].x);
      hi_x = std::max(hi_x, a.position[i].x);
    }
  }
  // A level surface spans a wide chord near the top.
  EXPECT_GT(hi_x - lo_x, 0.3 * c.inner_diameter);
}
