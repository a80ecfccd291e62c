#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "conescoop/engine.hpp"
#include "conescoop/sheet.hpp"
#include "conescoop/trajectory.hpp"
#include "oracles.hpp"

namespace cs = conescoop;

namespace {

const cs::ConeConfig kCone80 = cs::ConeConfig::from_bottom_diameter(0.05, 0.08);

double relaxed_tip_drop(cs::SheetState s, double load) {
  std::vector<cs::Vec2> f(s.nodes.size());
  f.back() = {0.0, -load};
  for (int i = 0; i < 300000; ++i) cs::advance_sheet(s, f, 2e-5);
  return -s.tip().y;
}

}  // namespace

TEST(Sheet, StiffnessMultiplierExamples) {
  const auto flat = cs::ConeConfig::from_bottom_diameter(0.05, 0.1);
  EXPECT_DOUBLE_EQ(cs::stiffness_multiplier(flat, 60.0), 1.0);
  const auto tight = cs::ConeConfig::from_bottom_diameter(0.05, 0.05 * std::sqrt(2.0));
  EXPECT_NEAR(cs::stiffness_multiplier(tight, 1.0), std::sqrt(2.0), 1e-12);
  const auto s = cs::build_sheet(cs::sheet_preset("pp_sheet"), flat, 16, {.anisotropy_gain = 60.0});
  // Per-unit-width stiffness times the section width.
  EXPECT_NEAR(s.effective_ei.front(), cs::sheet_preset("pp_sheet").base_bending_stiffness() * 0.1,
              1e-12 * s.effective_ei.front());
}

TEST(Sheet, StiffnessMultiplierGrowsAsConeTightens) {
  double prev = 0.0;
  for (double d = 0.1; d >= 0.0707; d -= 0.001) {
    const double m = cs::stiffness_multiplier(cs::ConeConfig::from_bottom_diameter(0.05, d), 60.0);
    ASSERT_GE(m, prev);
    prev = m;
  }
}

TEST(Sheet, RigidPresetIsFarStiffer) {
  const auto pp = cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16);
  const auto sus = cs::build_sheet(cs::sheet_preset("sus304_sheet"), kCone80, 16);
  EXPECT_GE(sus.effective_ei.front(), 100.0 * pp.effective_ei.front());
}

TEST(Sheet, BuildRejectsCoarseRods) {
  EXPECT_THROW(cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 7), std::invalid_argument);
  EXPECT_THROW(cs::build_ladle(cs::sheet_preset("silicone_ladle"), {}, 4), std::invalid_argument);
}

TEST(Sheet, InitialRodIsStraightAndClamped) {
  const cs::Pose2 base{{0.01, 0.02}, 0.3};
  const auto s = cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16, {.base_pose = base});
  ASSERT_EQ(s.nodes.size(), 17u);
  EXPECT_EQ(s.nodes.front(), base.position);
  EXPECT_NEAR(s.length(), 0.05, 1e-12);
  for (const auto& p : s.nodes) EXPECT_NEAR(cs::cross(cs::unit_from_angle(0.3), p - base.position), 0.0, 1e-15);
}

TEST(Sheet, StraightRodWithoutLoadStaysPut) {
  auto s = cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16);
  const auto start = s.nodes;
  std::vector<cs::Vec2> none(s.nodes.size());
  for (int i = 0; i < 20000; ++i) cs::advance_sheet(s, none, 2e-5);
  for (std::size_t k = 0; k < start.size(); ++k) EXPECT_NEAR(cs::norm(s.nodes[k] - start[k]), 0.0, 1e-12);
}

TEST(Sheet, CantileverMatchesBeamTheory) {
  EXPECT_LT(cs::oracle::cantilever("pp_sheet", 1e-4).relative_error(), 0.05);
  EXPECT_LT(cs::oracle::cantilever("sus304_sheet", 1e-3).relative_error(), 0.05);
}

TEST(Sheet, FineRodsStayStable) {
  for (std::size_t n : {24u, 48u}) {
    EXPECT_LT(cs::oracle::cantilever("pp_sheet", 1e-4, n).relative_error(), 0.05) << n;
  }
}

TEST(Sheet, DeflectionOrdering) {
  const double load = 2e-4;
  const double pp = relaxed_tip_drop(cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16), load);
  const double sus = relaxed_tip_drop(cs::build_sheet(cs::sheet_preset("sus304_sheet"), kCone80, 16), load);
  EXPECT_GT(pp, sus);
  EXPECT_GT(sus, 0.0);

  double prev = 1e9;
  for (double gain : {0.0, 1.0, 5.0, 20.0}) {
    const double y = relaxed_tip_drop(
        cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16, {.anisotropy_gain = gain}), load);
    EXPECT_LT(y, prev) << gain;
    prev = y;
  }
}

TEST(Sheet, ReleasedBendLosesEnergyAndKeepsLength) {
  // dt small enough that physical node mass, not the stability pseudo-mass, sets inertia.
  const double dt = 1e-5;
  auto s = cs::build_sheet(cs::sheet_preset("pp_sheet"), kCone80, 16, {.anisotropy_gain = 0.0});
  std::vector<cs::Vec2> f(s.nodes.size());
  f.back() = {0.0, -5e-3};
  for (int i = 0; i < 40000; ++i) cs::advance_sheet(s, f, dt);
  std::fill(f.begin(), f.end(), cs::Vec2{});
  const double e0 = cs::elastic_energy(s) + cs::kinetic_energy(s);
  ASSERT_GT(e0, 0.0);
  double last = e0;
  for (int i = 0; i < 100000; ++i) {
    cs::advance_sheet(s, f, dt);
    const double e = cs::elastic_energy(s) + cs::kinetic_energy(s);
    ASSERT_LE(e, last + 1e-12 * e0) << "step " << i;
    last = e;
    ASSERT_LT(cs::max_segment_strain(s), 0.01);
  }
  EXPECT_LT(last, 1e-6 * e0);
}

TEST(Sheet, PressedFlexibleTipClosesTheGap) {
  // Tool held at its deepest sweep pose, 2 mm into a thick-walled 83 mm bowl.
  auto c = cs::make_container(0.083);
  c.wall_thickness = 0.006;
  cs::TrajectoryParams tp;
  tp.penetration_offset = 0.002;
  const auto plan = cs::plan_scoop(c, kCone80, tp);
  const auto& sweep = plan.phase("sweep").waypoints;
  std::size_t deepest = 0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    if (plan.tip_of(sweep[k]).y < plan.tip_of(sweep[deepest]).y) deepest = k;
  }
  auto rest = [&](const char* preset) {
    cs::ParticleWorld w;
    w.container = c;
    w.sheet = cs::build_sheet(cs::sheet_preset(preset), kCone80, 16,
                              {.anisotropy_gain = 60.0, .base_pose = sweep[deepest]});
    for (int i = 0; i < 50000; ++i) cs::step(w);
    return *w.sheet;
  };
  const auto pp = rest("pp_sheet");
  const auto sus = rest("sus304_sheet");
  const double half_radius = 0.5 * 0.0005;
  const double pp_gap = cs::container_sdf(c, pp.tip()).distance;
  const double sus_gap = cs::container_sdf(c, sus.tip()).distance;
  EXPECT_LT(std::abs(pp_gap), half_radius);
  EXPECT_LT(sus_gap, -4.0 * half_radius);
  EXPECT_LT(std::abs(pp_gap), std::abs(sus_gap));
  EXPECT_LT(cs::max_segment_strain(pp), 0.01);
}
