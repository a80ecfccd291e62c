#include "conescoop/capture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conescoop {

void CoverageModel::validate() const {
  if (!(widening_gain >= 0.0)) throw std::invalid_argument("capture: widening gain must be >= 0");
  if (!(coverage_exponent > 0.0)) throw std::invalid_argument("capture: coverage exponent must be > 0");
}

double effective_width(double nominal_width, double width_cap, double press_depth, const CoverageModel& model) {
  if (!(press_depth >= 0.0)) throw std::invalid_argument("press depth must be >= 0");
  return std::min(nominal_width + model.widening_gain * press_depth, std::max(width_cap, nominal_width));
}

double effective_width(const ConeConfig& cone, double press_depth, const CoverageModel& model) {
  return effective_width(cone.bottom_diameter(), 2.0 * cone.sheet_radius(), press_depth, model);
}

double container_cross_width(const ContainerSpec& c, double sweep_depth) {
  const double r = c.radius();
  const double h = r - sweep_depth;
  return 2.0 * std::sqrt(std::max(0.0, r * r - h * h));
}

double lateral_coverage(double width, const ContainerSpec& c, double sweep_depth, const CoverageModel& model,
                        double nominal_width) {
  if (!(sweep_depth > 0.0) || sweep_depth > c.rim_depth * (1.0 + 1e-12)) {
    throw std::invalid_argument("sweep depth must lie in (0, rim_depth]");
  }
  if (!(width >= 0.0)) return 0.0;
  const double D = c.inner_diameter;
  if (nominal_width > D) {
    const double squeezed = std::max(D, 2.0 * nominal_width - width);
    return (D / squeezed) * (D / squeezed);
  }
  const double wc = container_cross_width(c, sweep_depth);
  return std::pow(std::min(1.0, width / wc), model.coverage_exponent);
}

double scoop_fraction(double in_plane_retained, double coverage) {
  if (!(in_plane_retained >= 0.0 && in_plane_retained <= 1.0) || !(coverage >= 0.0 && coverage <= 1.0)) {
    throw std::invalid_argument("scoop_fraction inputs must lie in [0, 1]");
  }
  return in_plane_retained * coverage;
}

}  // namespace conescoop
