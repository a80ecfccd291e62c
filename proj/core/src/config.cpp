// JSON run-config reader/writer. Lengths in files are millimetres, angles
// degrees, masses grams; field names carry the unit.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "conescoop/harness.hpp"
#include "json.hpp"

namespace conescoop {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback, double scale = 1.0) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>() * scale;
  }

  long long integer(const std::string& key, long long fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(key, "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string field = path_;
    if (!key.empty()) field = field.empty() ? key : field + "." + key;
    throw ConfigError("config field '" + field + "': " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr double kMm = 1e-3;
constexpr double kDeg = std::numbers::pi / 180.0;

RunConfig from_json(const json& root) {
  RunConfig c;
  Section top(root, "");
  c.scenario_name = top.text("scenario", c.scenario_name);
  c.trials = static_cast<int>(top.integer("trials", c.trials));
  c.base_seed = top.unsigned_integer("base_seed", c.base_seed);

  {
    Section s = top.child("container");
    const double d = s.number("inner_diameter_mm", c.container.inner_diameter, kMm);
    c.container = make_container(d, {}, s.number("tilt_deg", c.container.tilt_angle, kDeg));
    c.container.rim_depth = s.number("rim_depth_mm", c.container.rim_depth, kMm);
    c.container.wall_thickness = s.number("wall_thickness_mm", c.container.wall_thickness, kMm);
    s.finish();
  }
  {
    Section s = top.child("effector");
    EffectorConfig& e = c.effector;
    const std::string type = s.text("type", "cone");
    if (type == "cone") {
      e.kind = EffectorKind::Cone;
    } else if (type == "ladle") {
      e.kind = EffectorKind::Ladle;
    } else {
      s.fail("type", "unknown effector type '" + type + "'; available: cone, ladle");
    }
    const std::string preset = s.text("sheet", e.kind == EffectorKind::Ladle ? "silicone_ladle" : "pp_sheet");
    try {
      e.sheet = sheet_preset(preset);
    } catch (const std::invalid_argument& ex) {
      s.fail("sheet", ex.what());
    }
    e.sheet.thickness = s.number("thickness_mm", e.sheet.thickness, kMm);
    e.sheet.elastic_modulus = s.number("elastic_modulus_mpa", e.sheet.elastic_modulus, 1e6);
    e.sheet.density = s.number("density_kg_m3", e.sheet.density);
    e.sheet.rigid = s.boolean("rigid", e.sheet.rigid);
    e.sheet.rigid_stiffness_factor = s.number("rigid_stiffness_factor", e.sheet.rigid_stiffness_factor);
    e.sheet.friction_coefficient = s.number("friction", e.sheet.friction_coefficient);
    e.sheet_radius = s.number("sheet_radius_mm", e.sheet_radius, kMm);
    e.bottom_diameter = s.number("bottom_diameter_mm", e.bottom_diameter, kMm);
    if (s.has("slide_angle_deg")) {
      if (s.has("bottom_diameter_mm")) s.fail("slide_angle_deg", "give either bottom_diameter_mm or slide_angle_deg");
      try {
        e.bottom_diameter = bottom_diameter(e.sheet_radius, s.number("slide_angle_deg", 0.0, kDeg));
      } catch (const std::domain_error& ex) {
        s.fail("slide_angle_deg", ex.what());
      }
    }
    e.segments = static_cast<std::size_t>(s.integer("segments", static_cast<long long>(e.segments)));
    e.anisotropy_gain = s.number("anisotropy_gain", e.anisotropy_gain);
    e.damping_ratio = s.number("damping_ratio", e.damping_ratio);
    e.ladle.width = s.number("ladle_width_mm", e.ladle.width, kMm);
    e.ladle.depth = s.number("ladle_depth_mm", e.ladle.depth, kMm);
    e.ladle.compliant_tip_length = s.number("ladle_compliant_tip_mm", e.ladle.compliant_tip_length, kMm);
    s.finish();
  }
  {
    Section s = top.child("granular");
    const std::string preset = s.text("preset", c.granular.material_name);
    try {
      c.granular = granular_preset(preset);
    } catch (const std::invalid_argument& ex) {
      s.fail("preset", ex.what());
    }
    GranularSpec& g = c.granular;
    g.particle_radius_mean = s.number("particle_radius_mm", g.particle_radius_mean, kMm);
    g.particle_radius_spread = s.number("radius_spread", g.particle_radius_spread);
    g.particle_density = s.number("areal_density_kg_m2", g.particle_density);
    g.friction_coefficient = s.number("friction", g.friction_coefficient);
    g.restitution_damping = s.number("damping_ratio", g.restitution_damping);
    g.normal_stiffness = s.number("normal_stiffness_n_m", g.normal_stiffness);
    g.total_mass = s.number("total_mass_g", g.total_mass, 1e-3);
    s.finish();
  }
  {
    Section s = top.child("trajectory");
    TrajectoryParams& t = c.trajectory;
    t.penetration_offset = s.number("penetration_offset_mm", t.penetration_offset, kMm);
    t.sweep_speed = s.number("sweep_speed_mm_s", t.sweep_speed, kMm);
    t.max_angular_rate = s.number("max_angular_rate_deg_s", t.max_angular_rate, kDeg);
    t.attack_angle = s.number("attack_angle_deg", t.attack_angle, kDeg);
    t.attack_margin = s.number("attack_margin_deg", t.attack_margin, kDeg);
    t.frame_clearance = s.number("frame_clearance_mm", t.frame_clearance, kMm);
    t.lip_angle = s.number("lip_angle_deg", t.lip_angle, kDeg);
    t.entry_margin = s.number("entry_margin_deg", t.entry_margin, kDeg);
    t.exit_margin = s.number("exit_margin_deg", t.exit_margin, kDeg);
    t.sweep_step = s.number("sweep_step_deg", t.sweep_step, kDeg);
    t.approach_clearance = s.number("approach_clearance_mm", t.approach_clearance, kMm);
    t.insert_standoff = s.number("insert_standoff_mm", t.insert_standoff, kMm);
    t.retract = s.number("retract_mm", t.retract, kMm);
    t.lift_clearance = s.number("lift_clearance_mm", t.lift_clearance, kMm);
    t.dump_clearance = s.number("dump_clearance_mm", t.dump_clearance, kMm);
    t.shake_cycles = static_cast<int>(s.integer("shake_cycles", t.shake_cycles));
    t.shake_amplitude = s.number("shake_amplitude_mm", t.shake_amplitude, kMm);
    s.finish();
  }
  {
    Section s = top.child("capture");
    c.capture.widening_gain = s.number("widening_gain", c.capture.widening_gain);
    c.capture.coverage_exponent = s.number("coverage_exponent", c.capture.coverage_exponent);
    c.sweep_depth = s.number("sweep_depth_mm", c.sweep_depth, kMm);
    s.finish();
  }
  {
    Section s = top.child("simulation");
    SimulationConfig& m = c.simulation;
    m.dt = s.number("dt_s", m.dt);
    m.fill.dt = m.dt;
    m.fill.settle_speed = s.number("settle_speed_mm_s", m.fill.settle_speed, kMm);
    m.fill.min_settle_time = s.number("min_settle_time_s", m.fill.min_settle_time);
    m.fill.max_settle_steps = static_cast<std::size_t>(
        s.integer("max_settle_steps", static_cast<long long>(m.fill.max_settle_steps)));
    m.fill.max_particles = static_cast<std::size_t>(
        s.integer("max_particles", static_cast<long long>(m.fill.max_particles)));
    m.fill.shake_amplitude = s.number("fill_shake_amplitude_mm", m.fill.shake_amplitude, kMm);
    m.fill.shake_frequency = s.number("fill_shake_frequency_hz", m.fill.shake_frequency);
    m.fill.shake_duration = s.number("fill_shake_duration_s", m.fill.shake_duration);
    m.fill.wall_stiffness_factor = s.number("wall_stiffness_factor", m.fill.wall_stiffness_factor);
    m.dwell_min = s.number("dwell_min_s", m.dwell_min);
    m.dwell_max = s.number("dwell_max_s", m.dwell_max);
    m.transfer_rate = s.number("transfer_rate_per_s", m.transfer_rate);
    m.rest_speed = s.number("rest_speed_mm_s", m.rest_speed, kMm);
    m.capture_distance = s.number("capture_distance_mm", m.capture_distance, kMm);
    m.not_insertable_ratio = s.number("not_insertable_ratio", m.not_insertable_ratio);
    m.trace_every = static_cast<std::size_t>(s.integer("trace_every", static_cast<long long>(m.trace_every)));
    m.particle_blowup_speed = s.number("particle_blowup_speed_m_s", m.particle_blowup_speed);
    m.sheet_blowup_speed = s.number("sheet_blowup_speed_m_s", m.sheet_blowup_speed);
    m.sheet_wall_stiffness = s.number("sheet_wall_stiffness_n_m", m.sheet_wall_stiffness);
    s.finish();
  }
  top.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return c;
}

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < ex.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": malformed JSON: " << ex.what();
    throw ConfigError(os.str());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "': file not found or unreadable");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig from_json_with_source(const json& j, const std::string& source) {
  try {
    return from_json(j);
  } catch (const ConfigError& ex) {
    throw ConfigError(source + ": " + ex.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  return from_json_with_source(parse_text(text, source), source);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.string());
}

std::vector<RunConfig> load_matrix(const std::filesystem::path& path) {
  const std::string source = path.string();
  const json root = parse_text(read_file(path), source);
  if (!root.is_object() || !root.contains("cells") || !root.at("cells").is_array()) {
    throw ConfigError(source + ": matrix needs a \"cells\" array");
  }
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it.key() != "cells" && it.key() != "defaults") throw ConfigError(source + ": unknown field '" + it.key() + "'");
  }
  const json defaults = root.value("defaults", json::object());
  std::vector<RunConfig> out;
  std::size_t index = 0;
  for (const json& cell : root.at("cells")) {
    json merged = defaults;
    merged.merge_patch(cell);
    out.push_back(from_json_with_source(merged, source + " cells[" + std::to_string(index++) + "]"));
  }
  return out;
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario_name;
  j["trials"] = c.trials;
  j["base_seed"] = c.base_seed;
  j["container"] = {{"inner_diameter_mm", c.container.inner_diameter / kMm},
                    {"tilt_deg", c.container.tilt_angle / kDeg},
                    {"rim_depth_mm", c.container.rim_depth / kMm},
                    {"wall_thickness_mm", c.container.wall_thickness / kMm}};
  const EffectorConfig& e = c.effector;
  j["effector"] = {{"type", e.kind == EffectorKind::Cone ? "cone" : "ladle"},
                   {"sheet", e.sheet.material_name},
                   {"thickness_mm", e.sheet.thickness / kMm},
                   {"elastic_modulus_mpa", e.sheet.elastic_modulus / 1e6},
                   {"density_kg_m3", e.sheet.density},
                   {"rigid", e.sheet.rigid},
                   {"rigid_stiffness_factor", e.sheet.rigid_stiffness_factor},
                   {"friction", e.sheet.friction_coefficient},
                   {"sheet_radius_mm", e.sheet_radius / kMm},
                   {"bottom_diameter_mm", e.bottom_diameter / kMm},
                   {"segments", e.segments},
                   {"anisotropy_gain", e.anisotropy_gain},
                   {"damping_ratio", e.damping_ratio},
                   {"ladle_width_mm", e.ladle.width / kMm},
                   {"ladle_depth_mm", e.ladle.depth / kMm},
                   {"ladle_compliant_tip_mm", e.ladle.compliant_tip_length / kMm}};
  const GranularSpec& g = c.granular;
  j["granular"] = {{"preset", g.material_name},
                   {"particle_radius_mm", g.particle_radius_mean / kMm},
                   {"radius_spread", g.particle_radius_spread},
                   {"areal_density_kg_m2", g.particle_density},
                   {"friction", g.friction_coefficient},
                   {"damping_ratio", g.restitution_damping},
                   {"normal_stiffness_n_m", g.normal_stiffness},
                   {"total_mass_g", g.total_mass * 1e3}};
  const TrajectoryParams& t = c.trajectory;
  j["trajectory"] = {{"penetration_offset_mm", t.penetration_offset / kMm},
                     {"sweep_speed_mm_s", t.sweep_speed / kMm},
                     {"max_angular_rate_deg_s", t.max_angular_rate / kDeg},
                     {"attack_angle_deg", t.attack_angle / kDeg},
                     {"attack_margin_deg", t.attack_margin / kDeg},
                     {"frame_clearance_mm", t.frame_clearance / kMm},
                     {"lip_angle_deg", t.lip_angle / kDeg},
                     {"entry_margin_deg", t.entry_margin / kDeg},
                     {"exit_margin_deg", t.exit_margin / kDeg},
                     {"sweep_step_deg", t.sweep_step / kDeg},
                     {"approach_clearance_mm", t.approach_clearance / kMm},
                     {"insert_standoff_mm", t.insert_standoff / kMm},
                     {"retract_mm", t.retract / kMm},
                     {"lift_clearance_mm", t.lift_clearance / kMm},
                     {"dump_clearance_mm", t.dump_clearance / kMm},
                     {"shake_cycles", t.shake_cycles},
                     {"shake_amplitude_mm", t.shake_amplitude / kMm}};
  j["capture"] = {{"widening_gain", c.capture.widening_gain},
                  {"coverage_exponent", c.capture.coverage_exponent},
                  {"sweep_depth_mm", c.sweep_depth / kMm}};
  const SimulationConfig& m = c.simulation;
  j["simulation"] = {{"dt_s", m.dt},
                     {"settle_speed_mm_s", m.fill.settle_speed / kMm},
                     {"min_settle_time_s", m.fill.min_settle_time},
                     {"max_settle_steps", m.fill.max_settle_steps},
                     {"max_particles", m.fill.max_particles},
                     {"fill_shake_amplitude_mm", m.fill.shake_amplitude / kMm},
                     {"fill_shake_frequency_hz", m.fill.shake_frequency},
                     {"fill_shake_duration_s", m.fill.shake_duration},
                     {"wall_stiffness_factor", m.fill.wall_stiffness_factor},
                     {"dwell_min_s", m.dwell_min},
                     {"dwell_max_s", m.dwell_max},
                     {"transfer_rate_per_s", m.transfer_rate},
                     {"rest_speed_mm_s", m.rest_speed / kMm},
                     {"capture_distance_mm", m.capture_distance / kMm},
                     {"not_insertable_ratio", m.not_insertable_ratio},
                     {"trace_every", m.trace_every},
                     {"particle_blowup_speed_m_s", m.particle_blowup_speed},
                     {"sheet_blowup_speed_m_s", m.sheet_blowup_speed},
                     {"sheet_wall_stiffness_n_m", m.sheet_wall_stiffness}};
  return j.dump(2) + "\n";
}

}  // namespace conescoop
