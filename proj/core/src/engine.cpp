#include "conescoop/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace conescoop {

namespace {

struct ClosestPoint {
  Vec2 point;
  double t = 0.0;
};

ClosestPoint closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {a + t * ab, t};
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

// Spring-dashpot normal force plus regularized Coulomb friction on body A.
// `n` points from B to A, `rel_v` is v_A - v_B.
struct ContactLaw {
  double k;
  double zeta;
  double mu;
  double tangential_gain;
};

Vec2 contact_force(const ContactLaw& law, double overlap, const Vec2& n, const Vec2& rel_v, double m_eff,
                   EngineStats& stats) {
  const double c = 2.0 * law.zeta * std::sqrt(law.k * m_eff);
  const double vn = dot(rel_v, n);
  const double fn = std::max(0.0, law.k * overlap - c * vn);
  Vec2 f = fn * n;
  const Vec2 vt = rel_v - vn * n;
  const double vt_mag = norm(vt);
  if (vt_mag > 0.0 && law.mu > 0.0) {
    const double gamma = law.tangential_gain * 2.0 * std::sqrt(law.k * m_eff);
    const double ft = std::min(law.mu * fn, gamma * vt_mag);
    f -= (ft / vt_mag) * vt;
    stats.max_coulomb_excess = std::max(stats.max_coulomb_excess, ft - law.mu * fn);
  }
  return f;
}

std::uint64_t cell_hash(std::int64_t cx, std::int64_t cy) {
  auto h = static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(cy) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 29;
  return h;
}

// Uniform grid hashed into a fixed table; buckets filled by a stable
// counting sort so iteration order only depends on particle indices.
class SpatialHash {
 public:
  void build(const std::vector<Vec2>& pos, double cell) {
    const std::size_t n = pos.size();
    inv_cell_ = 1.0 / cell;
    std::size_t table = 16;
    while (table < 2 * n) table <<= 1;
    mask_ = table - 1;
    cx_.resize(n);
    cy_.resize(n);
    bucket_of_.resize(n);
    start_.assign(table + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      cx_[i] = static_cast<std::int64_t>(std::floor(pos[i].x * inv_cell_));
      cy_[i] = static_cast<std::int64_t>(std::floor(pos[i].y * inv_cell_));
      bucket_of_[i] = cell_hash(cx_[i], cy_[i]) & mask_;
      ++start_[bucket_of_[i] + 1];
    }
    for (std::size_t b = 0; b < table; ++b) start_[b + 1] += start_[b];
    order_.resize(n);
    fill_ = start_;
    for (std::size_t i = 0; i < n; ++i) order_[fill_[bucket_of_[i]]++] = i;
  }

  template <class F>
  void for_each_neighbor_above(std::size_t i, F&& f) const {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const std::int64_t nx = cx_[i] + dx;
        const std::int64_t ny = cy_[i] + dy;
        const std::size_t b = cell_hash(nx, ny) & mask_;
        for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
          const std::size_t j = order_[k];
          if (j > i && cx_[j] == nx && cy_[j] == ny) f(j);
        }
      }
    }
  }

 private:
  double inv_cell_ = 1.0;
  std::size_t mask_ = 0;
  std::vector<std::int64_t> cx_, cy_;
  std::vector<std::size_t> bucket_of_, start_, fill_, order_;
};

struct ToolSegment {
  Vec2 a, b;
  Vec2 va, vb;
  // Node indices receiving the reaction; npos for the rigid back wall.
  std::size_t node_a, node_b;
};

constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

std::vector<ToolSegment> tool_segments(const SheetState& s) {
  std::vector<ToolSegment> out;
  for (std::size_t k = 0; k < s.segment_count(); ++k) {
    out.push_back({s.nodes[k], s.nodes[k + 1], s.node_velocities[k], s.node_velocities[k + 1], k, k + 1});
  }
  if (s.has_back_wall()) {
    const Vec2 tip = s.back_wall_tip();
    const Vec2 v_tip = s.base_velocity + s.base_angular_velocity * perp(tip - s.base_pose.position);
    out.push_back({s.base_pose.position, tip, s.base_velocity, v_tip, kNoNode, kNoNode});
  }
  return out;
}

double sheet_half_thickness(const SheetState& s) { return std::max(0.5 * s.thickness, 1e-4); }

}  // namespace

void ParticleWorld::validate() const {
  const std::size_t n = position.size();
  if (velocity.size() != n || radius.size() != n || mass.size() != n) {
    throw std::invalid_argument("particle arrays have mismatched lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(radius[i] > 0.0) || !(mass[i] > 0.0)) {
      throw std::invalid_argument("particle " + std::to_string(i) + " has non-positive radius or mass");
    }
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (n > 0 && dt > stable_dt(*this) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt " << dt << " s exceeds the stability bound " << stable_dt(*this) << " s";
    throw std::invalid_argument(os.str());
  }
  if (n > 0 && dt > boundary_stable_dt(*this) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt " << dt << " s exceeds the boundary-contact bound " << boundary_stable_dt(*this) << " s";
    throw std::invalid_argument(os.str());
  }
}

double stable_dt(const ParticleWorld& w) {
  if (w.mass.empty()) return std::numeric_limits<double>::infinity();
  const double m_min = *std::min_element(w.mass.begin(), w.mass.end());
  return 0.2 * std::sqrt(m_min / w.contact.normal_stiffness);
}

double boundary_stable_dt(const ParticleWorld& w) {
  if (w.mass.empty()) return std::numeric_limits<double>::infinity();
  const double m_min = *std::min_element(w.mass.begin(), w.mass.end());
  double k = w.contact.wall_stiffness();
  if (!w.statics.empty()) k = std::max(k, w.contact.static_stiffness());
  if (w.sheet) k = std::max(k, w.contact.tool_stiffness());
  return 0.5 * std::sqrt(m_min / k);
}

void step(ParticleWorld& w) {
  const std::size_t n = w.size();
  const ContactParams& cp = w.contact;
  std::vector<Vec2> force(n);
  for (std::size_t i = 0; i < n; ++i) force[i] = w.mass[i] * (w.gravity - w.frame_acceleration);

  const ContactLaw pair_law{cp.normal_stiffness, cp.damping_ratio, cp.friction, cp.tangential_gain};
  const ContactLaw wall_law{cp.wall_stiffness(), cp.wall_damping_ratio, cp.friction, cp.tangential_gain};
  const ContactLaw static_law{cp.static_stiffness(), cp.wall_damping_ratio, cp.friction, cp.tangential_gain};

  double r_max = 0.0;
  for (double r : w.radius) r_max = std::max(r_max, r);
  if (n > 1) {
    thread_local SpatialHash grid;
    grid.build(w.position, 2.0 * r_max);
    for (std::size_t i = 0; i < n; ++i) {
      grid.for_each_neighbor_above(i, [&](std::size_t j) {
        const Vec2 d = w.position[i] - w.position[j];
        const double dist2 = norm2(d);
        const double reach = w.radius[i] + w.radius[j];
        if (dist2 >= reach * reach || dist2 == 0.0) return;
        const double dist = std::sqrt(dist2);
        const Vec2 nrm = d / dist;
        const double m_eff = w.mass[i] * w.mass[j] / (w.mass[i] + w.mass[j]);
        const Vec2 f = contact_force(pair_law, reach - dist, nrm, w.velocity[i] - w.velocity[j], m_eff, w.stats);
        force[i] += f;
        force[j] -= f;
      });
    }
  }

  auto note_penetration = [&](std::size_t i, double overlap, double& by_kind) {
    const double ratio = overlap / w.radius[i];
    w.stats.max_boundary_penetration = std::max(w.stats.max_boundary_penetration, ratio);
    by_kind = std::max(by_kind, ratio);
  };

  std::optional<ContainerGeometry> bowl;
  if (w.container) bowl.emplace(*w.container);
  if (bowl) {
    for (std::size_t i = 0; i < n; ++i) {
      const SdfSample s = bowl->sdf(w.position[i]);
      const double overlap = w.radius[i] - s.distance;
      if (overlap <= 0.0) continue;
      note_penetration(i, overlap, w.stats.max_penetration_container);
      force[i] += contact_force(wall_law, overlap, s.normal, w.velocity[i], w.mass[i], w.stats);
    }
  }

  for (const StaticSegment& seg : w.statics) {
    const double pad = seg.radius + 2.0 * r_max;
    const Vec2 lo{std::min(seg.a.x, seg.b.x) - pad, std::min(seg.a.y, seg.b.y) - pad};
    const Vec2 hi{std::max(seg.a.x, seg.b.x) + pad, std::max(seg.a.y, seg.b.y) + pad};
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = w.position[i];
      if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y) continue;
      const ClosestPoint cpt = closest_on_segment(w.position[i], seg.a, seg.b);
      const Vec2 d = w.position[i] - cpt.point;
      const double dist2 = norm2(d);
      const double reach = w.radius[i] + seg.radius;
      if (dist2 >= reach * reach || dist2 == 0.0) continue;
      const double dist = std::sqrt(dist2);
      note_penetration(i, reach - dist, w.stats.max_penetration_static);
      force[i] += contact_force(static_law, reach - dist, d / dist, w.velocity[i], w.mass[i], w.stats);
    }
  }

  std::vector<Vec2> sheet_force;
  if (w.sheet) {
    SheetState& s = *w.sheet;
    sheet_force.assign(s.nodes.size(), Vec2{});
    const double h = sheet_half_thickness(s);
    const ContactLaw tool_law{cp.tool_stiffness(), cp.wall_damping_ratio, s.friction_coefficient,
                              cp.tangential_gain};
    const auto segs = tool_segments(s);
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (const auto& sg : segs) {
      lo = {std::min({lo.x, sg.a.x, sg.b.x}), std::min({lo.y, sg.a.y, sg.b.y})};
      hi = {std::max({hi.x, sg.a.x, sg.b.x}), std::max({hi.y, sg.a.y, sg.b.y})};
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = w.position[i];
      const double reach = w.radius[i] + h;
      if (p.x < lo.x - reach || p.x > hi.x + reach || p.y < lo.y - reach || p.y > hi.y + reach) continue;
      for (const auto& sg : segs) {
        if (p.x < std::min(sg.a.x, sg.b.x) - reach || p.x > std::max(sg.a.x, sg.b.x) + reach ||
            p.y < std::min(sg.a.y, sg.b.y) - reach || p.y > std::max(sg.a.y, sg.b.y) + reach) {
          continue;
        }
        const ClosestPoint cpt = closest_on_segment(p, sg.a, sg.b);
        const Vec2 d = p - cpt.point;
        const double dist2 = norm2(d);
        if (dist2 >= reach * reach || dist2 == 0.0) continue;
        const double dist = std::sqrt(dist2);
        note_penetration(i, reach - dist, w.stats.max_penetration_tool);
        const Vec2 v_tool = (1.0 - cpt.t) * sg.va + cpt.t * sg.vb;
        const Vec2 f = contact_force(tool_law, reach - dist, d / dist, w.velocity[i] - v_tool, w.mass[i], w.stats);
        force[i] += f;
        if (sg.node_a != kNoNode) {
          sheet_force[sg.node_a] -= (1.0 - cpt.t) * f;
          sheet_force[sg.node_b] -= cpt.t * f;
        }
      }
    }

    // Rod nodes against the container wall, plus gravity on the rod itself.
    const ContactLaw node_law{cp.sheet_wall_stiffness, cp.sheet_wall_damping_ratio, s.friction_coefficient,
                              cp.tangential_gain};
    for (std::size_t k = 1; k < s.nodes.size(); ++k) {
      sheet_force[k] += s.node_mass[k] * w.gravity;
      if (!bowl) continue;
      const SdfSample sd = bowl->sdf(s.nodes[k]);
      const double overlap = h - sd.distance;
      if (overlap <= 0.0) continue;
      const double m_node = std::max(s.node_mass[k], 1e-6);
      sheet_force[k] += contact_force(node_law, overlap, sd.normal, s.node_velocities[k], m_node, w.stats);
    }
  }

  const double dt = w.dt;
  for (std::size_t i = 0; i < n; ++i) {
    w.velocity[i] += (dt / w.mass[i]) * force[i];
    w.position[i] += dt * w.velocity[i];
    const double speed = norm(w.velocity[i]);
    if (!(speed <= w.blowup_speed)) {
      std::ostringstream os;
      os << "particle " << i << " speed " << speed << " m/s exceeds " << w.blowup_speed << " m/s at t=" << w.sim_time;
      throw SimulationAborted(os.str());
    }
  }
  if (w.sheet) {
    w.sheet->contact_stiffness_hint = 2.0 * cp.tool_stiffness() + cp.sheet_wall_stiffness;
    advance_sheet(*w.sheet, sheet_force, dt);
  }
  w.sim_time += dt;
  ++w.stats.steps;
}

double total_particle_mass(const ParticleWorld& w) {
  double m = 0.0;
  for (double x : w.mass) m += x;
  return m;
}

double particle_kinetic_energy(const ParticleWorld& w) {
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e += 0.5 * w.mass[i] * norm2(w.velocity[i]);
  return e;
}

double max_particle_speed(const ParticleWorld& w) {
  double v = 0.0;
  for (const Vec2& u : w.velocity) v = std::max(v, norm(u));
  return v;
}

std::vector<Vec2> boundary_forces(const ParticleWorld& w) {
  std::vector<Vec2> out(w.size());
  EngineStats scratch;
  const ContactParams& cp = w.contact;
  const ContactLaw wall_law{cp.wall_stiffness(), cp.wall_damping_ratio, cp.friction, cp.tangential_gain};
  const ContactLaw static_law{cp.static_stiffness(), cp.wall_damping_ratio, cp.friction, cp.tangential_gain};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.container) {
      const SdfSample s = container_sdf(*w.container, w.position[i]);
      const double overlap = w.radius[i] - s.distance;
      if (overlap > 0.0) out[i] += contact_force(wall_law, overlap, s.normal, w.velocity[i], w.mass[i], scratch);
    }
    for (const StaticSegment& seg : w.statics) {
      const ClosestPoint cpt = closest_on_segment(w.position[i], seg.a, seg.b);
      const Vec2 d = w.position[i] - cpt.point;
      const double dist = norm(d);
      const double reach = w.radius[i] + seg.radius;
      if (dist >= reach || dist == 0.0) continue;
      out[i] += contact_force(static_law, reach - dist, d / dist, w.velocity[i], w.mass[i], scratch);
    }
  }
  return out;
}

std::vector<bool> carried_mask(const ParticleWorld& w, double capture_distance) {
  std::vector<bool> mask(w.size(), false);
  if (!w.sheet) return mask;
  const SheetState& s = *w.sheet;
  std::vector<Vec2> poly(s.nodes.begin(), s.nodes.end());
  if (s.has_back_wall()) poly.push_back(s.back_wall_tip());
  const auto segs = tool_segments(s);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec2 p = w.position[i];
    if (point_in_polygon(p, poly)) {
      mask[i] = true;
      continue;
    }
    for (const auto& sg : segs) {
      const double reach = capture_distance + w.radius[i];
      if (norm2(p - closest_on_segment(p, sg.a, sg.b).point) <= reach * reach) {
        mask[i] = true;
        break;
      }
    }
  }
  return mask;
}

MassAccounting measure(const ParticleWorld& w, const MeasureRegions& regions) {
  MassAccounting acc;
  acc.total_mass = total_particle_mass(w);
  if (!(acc.total_mass > 0.0)) return acc;
  const auto carried = carried_mask(w, regions.capture_distance);
  double m_res = 0.0, m_car = 0.0, m_del = 0.0, m_sp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec2 p = w.position[i];
    if (carried[i]) {
      m_car += w.mass[i];
    } else if (regions.plate && regions.plate->contains(p)) {
      m_del += w.mass[i];
    } else if (regions.bowl && in_bowl_interior(*regions.bowl, p)) {
      m_res += w.mass[i];
    } else {
      m_sp += w.mass[i];
    }
  }
  acc.residue = m_res / acc.total_mass;
  acc.carried = m_car / acc.total_mass;
  acc.delivered = m_del / acc.total_mass;
  acc.spilled = m_sp / acc.total_mass;
  return acc;
}

TraceWriter::TraceWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open trace file '" + path + "'");
  out_ << "t,kind,index,x_mm,y_mm\n";
  out_ << std::setprecision(9);
}

void TraceWriter::write_frame(const ParticleWorld& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    out_ << w.sim_time << ",p," << i << ',' << w.position[i].x * 1e3 << ',' << w.position[i].y * 1e3 << '\n';
  }
  if (w.sheet) {
    const auto& nodes = w.sheet->nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      out_ << w.sim_time << ",s," << k << ',' << nodes[k].x * 1e3 << ',' << nodes[k].y * 1e3 << '\n';
    }
    if (w.sheet->has_back_wall()) {
      const Vec2 b = w.sheet->back_wall_tip();
      out_ << w.sim_time << ",w,0," << b.x * 1e3 << ',' << b.y * 1e3 << '\n';
    }
  }
}

}  // namespace conescoop
