#pragma once

// Out-of-plane correction: how much of the bowl's cross-width the scooping
// edge spans. The 2D simulation only sees the centre plane.

#include "conescoop/cone_geometry.hpp"
#include "conescoop/scene.hpp"

namespace conescoop {

struct CoverageModel {
  /// Width gained per unit press depth as the bottom circle flattens.
  double widening_gain = 2.5;
  double coverage_exponent = 1.45;
  void validate() const;
};

/// min(d + gain * press, cap); non-decreasing in press.
double effective_width(double nominal_width, double width_cap, double press_depth, const CoverageModel& model);
/// Cone version, capped at the flat-sheet diameter 2R.
double effective_width(const ConeConfig& cone, double press_depth, const CoverageModel& model);

/// Chord of the container at `sweep_depth` above its bottom: 2 sqrt(r^2 - (r - s)^2).
double container_cross_width(const ContainerSpec& container, double sweep_depth);

/// Undersized edge: min(1, w / W_c)^exponent. An edge wider than the bowl
/// (nominal_width > D) is squeezed in; coverage is (D / d_sq)^2 with
/// d_sq = max(D, 2 d - w), the width left after the elastic widening
/// budget is spent on squeezing. Throws std::invalid_argument when
/// sweep_depth is outside (0, rim_depth].
double lateral_coverage(double effective_width, const ContainerSpec& container, double sweep_depth,
                        const CoverageModel& model, double nominal_width);

/// Product of the in-plane retained fraction and the coverage; both in [0, 1].
double scoop_fraction(double in_plane_retained, double coverage);

}  // namespace conescoop
