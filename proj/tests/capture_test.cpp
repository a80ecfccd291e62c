#include <gtest/gtest.h>

#include <stdexcept>

#include "conescoop/capture.hpp"

namespace cs = conescoop;

TEST(Capture, EffectiveWidthExamples) {
  cs::CoverageModel m;
  m.widening_gain = 2.0;
  const auto cone = cs::ConeConfig::from_bottom_diameter(0.05, 0.08);
  EXPECT_DOUBLE_EQ(cs::effective_width(cone, 0.0, m), 0.08);
  EXPECT_NEAR(cs::effective_width(cone, 0.002, m), 0.084, 1e-12);
  EXPECT_THROW(cs::effective_width(cone, -1e-3, m), std::invalid_argument);
}

TEST(Capture, EffectiveWidthMonotoneAndCapped) {
  cs::CoverageModel m;
  for (double d : {0.0707107, 0.08, 0.09, 0.1}) {
    const auto cone = cs::ConeConfig::from_bottom_diameter(0.05, d);
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double w = cs::effective_width(cone, 0.0005 * i, m);
      ASSERT_GE(w, prev);
      ASSERT_LE(w, 0.1 + 1e-15);
      prev = w;
    }
  }
}

TEST(Capture, CrossWidthAtRimIsDiameter) {
  const auto c = cs::make_container(0.110);
  EXPECT_NEAR(cs::container_cross_width(c, c.rim_depth), 0.110, 1e-15);
  EXPECT_NEAR(cs::container_cross_width(c, 0.0), 0.0, 1e-15);
}

TEST(Capture, CoverageExamples) {
  const auto c = cs::make_container(0.110);
  cs::CoverageModel m;
  m.coverage_exponent = 1.0;
  const double depth = 0.03;
  const double wc = cs::container_cross_width(c, depth);
  EXPECT_DOUBLE_EQ(cs::lateral_coverage(wc, c, depth, m, 0.09), 1.0);
  EXPECT_DOUBLE_EQ(cs::lateral_coverage(0.5 * wc, c, depth, m, 0.09), 0.5);
  EXPECT_DOUBLE_EQ(cs::lateral_coverage(0.0, c, depth, m, 0.0), 0.0);
  EXPECT_THROW(cs::lateral_coverage(wc, c, 0.0, m, 0.09), std::invalid_argument);
  EXPECT_THROW(cs::lateral_coverage(wc, c, c.rim_depth * 1.01, m, 0.09), std::invalid_argument);
}

TEST(Capture, CoverageInUnitIntervalAndOneOnlyWhenCovering) {
  const auto c = cs::make_container(0.083);
  cs::CoverageModel m;
  const double depth = 0.027;
  const double wc = cs::container_cross_width(c, depth);
  for (int i = 0; i <= 200; ++i) {
    const double w = 0.001 * i;
    const double cov = cs::lateral_coverage(w, c, depth, m, std::min(w, 0.08));
    ASSERT_GE(cov, 0.0);
    ASSERT_LE(cov, 1.0);
    if (cov == 1.0) ASSERT_GE(w, wc);
  }
}

TEST(Capture, OversizePenaltyStrictlyDecreasing) {
  const auto c = cs::make_container(0.067);
  cs::CoverageModel m;
  double prev = 1.0 + 1e-12;
  for (double d = 0.0675; d <= 0.1; d += 0.0025) {
    const double cov = cs::lateral_coverage(d, c, c.rim_depth, m, d);
    ASSERT_LT(cov, prev) << d;
    ASSERT_GT(cov, 0.0);
    prev = cov;
  }
  EXPECT_NEAR(cs::lateral_coverage(0.1, c, c.rim_depth, m, 0.1), (0.067 / 0.1) * (0.067 / 0.1), 1e-12);
}

TEST(Capture, ScoopFraction) {
  EXPECT_DOUBLE_EQ(cs::scoop_fraction(1.0, 1.0), 1.0);
  EXPECT_NEAR(cs::scoop_fraction(0.98, 0.97), 0.9506, 1e-12);
  for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(cs::scoop_fraction(x, 0.0), 0.0);
  EXPECT_THROW(cs::scoop_fraction(1.2, 0.5), std::invalid_argument);
}

TEST(Capture, ModelValidation) {
  cs::CoverageModel m;
  m.widening_gain = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = {};
  m.coverage_exponent = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}
