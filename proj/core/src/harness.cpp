#include "conescoop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace conescoop {

ToolGeometry EffectorConfig::tool_geometry() const {
  if (kind == EffectorKind::Cone) return ToolGeometry::from_cone(cone());
  return {ladle.width, std::numbers::pi, 0.0, ladle.depth};
}

void RunConfig::validate() const {
  if (scenario_name.empty()) throw std::invalid_argument("scenario: name must not be empty");
  if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
  container.validate();
  granular.validate();
  effector.sheet.validate();
  if (effector.segments < kMinSheetSegments) {
    throw std::invalid_argument("effector.segments: must be >= " + std::to_string(kMinSheetSegments));
  }
  if (effector.kind == EffectorKind::Cone) {
    try {
      (void)effector.cone();
    } catch (const std::domain_error& e) {
      throw std::invalid_argument(std::string("effector: ") + e.what());
    }
    if (!(effector.anisotropy_gain >= 0.0)) throw std::invalid_argument("effector.anisotropy_gain: must be >= 0");
  }
  capture.validate();
  if (!(sweep_depth >= 0.0)) throw std::invalid_argument("capture.sweep_depth_mm: must be >= 0");
  if (!(simulation.dt > 0.0)) throw std::invalid_argument("simulation.dt_s: must be positive");
  if (!(simulation.dwell_max >= simulation.dwell_min) || simulation.dwell_min < 0.0) {
    throw std::invalid_argument("simulation: need 0 <= dwell_min_s <= dwell_max_s");
  }
  if (!(simulation.not_insertable_ratio >= 1.0)) {
    throw std::invalid_argument("simulation.not_insertable_ratio: must be >= 1");
  }
}

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& scenario, int trial_index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : scenario) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer over the combined words.
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base_seed ^ h) + static_cast<std::uint64_t>(trial_index));
}

bool is_not_insertable(const RunConfig& c) {
  return c.effector.kind == EffectorKind::Cone &&
         c.effector.bottom_diameter > c.simulation.not_insertable_ratio * c.container.inner_diameter;
}

SceneLayout scene_layout(const ContainerSpec& c) {
  SceneLayout s;
  const double r = c.radius();
  const double t = c.wall_thickness;
  const double seg_r = 0.001;
  const double floor_y = c.center.y - r - t - 0.004;
  s.statics.push_back({{c.center.x - 0.6, floor_y}, {c.center.x + 0.6, floor_y}, seg_r});

  const double tray_y = c.top_y();
  const double x_right = c.center.x - r - t - 0.005;
  const double x_left = x_right - 0.12;
  const double lip = 0.015;
  s.statics.push_back({{x_left, tray_y}, {x_right, tray_y}, seg_r});
  s.statics.push_back({{x_left, tray_y}, {x_left, tray_y + lip}, seg_r});
  s.statics.push_back({{x_right, tray_y}, {x_right, tray_y + lip}, seg_r});
  s.plate = {x_left, x_right, tray_y - 0.002, tray_y + 0.05};
  s.target = {0.5 * (x_left + x_right), tray_y + seg_r + lip};
  return s;
}

class FillCache {
 public:
  ParticleWorld get(const std::string& key, const std::function<ParticleWorld()>& make) {
    std::shared_future<ParticleWorld> fut;
    std::promise<ParticleWorld> promise;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = promise.get_future().share();
        entries_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(make());
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_future<ParticleWorld>> entries_;
};

namespace {

const std::string kDwell = "dwell";

std::string fill_key(const RunConfig& c, std::uint64_t seed) {
  std::ostringstream os;
  os << std::hexfloat;
  const auto& k = c.container;
  const auto& g = c.granular;
  const auto& f = c.simulation.fill;
  os << k.inner_diameter << '|' << k.tilt_angle << '|' << k.rim_depth << '|' << k.wall_thickness << '|'
     << g.particle_radius_mean << '|' << g.particle_radius_spread << '|' << g.particle_density << '|'
     << g.friction_coefficient << '|' << g.restitution_damping << '|' << g.normal_stiffness << '|' << g.total_mass
     << '|' << f.dt << '|' << f.settle_speed << '|' << f.min_settle_time << '|' << f.max_settle_steps << '|'
     << f.shake_amplitude << '|' << f.shake_frequency << '|' << f.shake_duration << '|' << f.wall_stiffness_factor
     << '|' << f.lattice_pitch << '|' << f.max_particles << '|' << seed;
  return os.str();
}

SheetState build_tool(const EffectorConfig& e, const Pose2& pose) {
  if (e.kind == EffectorKind::Ladle) return build_ladle(e.sheet, e.ladle, e.segments, pose, e.damping_ratio);
  SheetBuildOptions opt;
  opt.anisotropy_gain = e.anisotropy_gain;
  opt.base_pose = pose;
  opt.damping_ratio = e.damping_ratio;
  return build_sheet(e.sheet, e.cone(), e.segments, opt);
}

void fill_metadata(ScoopTrialResult& r, const RunConfig& c, int index) {
  r.scenario = c.scenario_name;
  r.container_diameter = c.container.inner_diameter;
  r.effector = c.effector.sheet.material_name;
  r.effector_width = c.effector.nominal_width();
  r.material = c.granular.material_name;
  r.trial_index = index;
}

}  // namespace

ScoopTrialResult run_trial(const RunConfig& cfg, int trial_index, const TrialOptions& opt) {
  const auto clock_start = std::chrono::steady_clock::now();
  ScoopTrialResult res;
  fill_metadata(res, cfg, trial_index);
  res.seed = opt.seed_override ? *opt.seed_override : trial_seed(cfg.base_seed, cfg.scenario_name, trial_index);
  auto finish = [&]() {
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return res;
  };

  try {
    cfg.validate();
    if (is_not_insertable(cfg)) {
      res.aborted = true;
      res.reason = "not_insertable";
      return finish();
    }
    FillOptions fill_opt = cfg.simulation.fill;
    fill_opt.dt = cfg.simulation.dt;
    auto make_fill = [&] { return fill_and_settle(cfg.container, cfg.granular, res.seed, fill_opt); };
    ParticleWorld world = opt.fill_cache ? opt.fill_cache->get(fill_key(cfg, res.seed), make_fill) : make_fill();
    if (world.size() == 0) return finish();

    const SceneLayout layout = scene_layout(cfg.container);
    TrajectoryParams tp = cfg.trajectory;
    tp.plate = layout.target;
    const TrajectoryPlan plan = plan_scoop(cfg.container, cfg.effector.tool_geometry(), tp);

    world.statics = layout.statics;
    world.dt = cfg.simulation.dt;
    world.blowup_speed = cfg.simulation.particle_blowup_speed;
    world.contact.sheet_wall_stiffness = cfg.simulation.sheet_wall_stiffness;
    world.sheet = build_tool(cfg.effector, pose_at(plan, 0.0));
    world.sheet->blowup_speed = cfg.simulation.sheet_blowup_speed;
    world.validate();

    const MeasureRegions regions{cfg.container, layout.plate, cfg.simulation.capture_distance};
    std::optional<TraceWriter> trace;
    if (opt.trace_path) trace.emplace(opt.trace_path->string());

    const TrajectoryPhase& sweep = plan.phase("sweep");
    const double sweep_t0 = sweep.times.front();
    const double sweep_t1 = sweep.times.back();
    const double dt = world.dt;
    const double contact_band = std::max(0.5 * world.sheet->thickness, 1e-4) + 5e-4;
    double press_sum = 0.0;
    std::size_t press_samples = 0;
    double max_strain = 0.0;
    std::size_t k = 0;

    auto advance = [&](const Pose2& pose, const std::string& phase) {
      drive_base(*world.sheet, pose, dt);
      step(world);
      if (opt.observer) opt.observer(world, phase);
      if (trace && k % cfg.simulation.trace_every == 0) trace->write_frame(world);
      if (k % 100 == 0) max_strain = std::max(max_strain, max_segment_strain(*world.sheet));
      ++k;
    };

    const double total = plan.total_duration();
    const auto n_steps = static_cast<std::size_t>(std::ceil(total / dt));
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double t = std::min(static_cast<double>(i + 1) * dt, total);
      advance(pose_at(plan, t), phase_at(plan, t));
      if (t >= sweep_t0 && t <= sweep_t1) {
        const SheetState& s = *world.sheet;
        if (container_sdf(cfg.container, s.tip()).distance < contact_band) {
          press_sum += norm(s.tip() - s.undeformed_tip());
          ++press_samples;
        }
      }
    }

    // Dwell at the dump pose, shaking, until the carried mass stops moving.
    const Pose2 dump = plan.dump_pose;
    const double amp = cfg.trajectory.shake_amplitude;
    const double omega = amp > 0.0 ? cfg.trajectory.sweep_speed / amp : 0.0;
    const double window = 0.05;
    const auto window_steps = static_cast<std::size_t>(std::ceil(window / dt));
    double dwell = 0.0;
    double carried_prev = measure(world, regions).carried;
    while (dwell < cfg.simulation.dwell_max) {
      for (std::size_t i = 0; i < window_steps; ++i) {
        dwell += dt;
        advance({dump.position + Vec2{amp * std::sin(omega * dwell), 0.0}, dump.angle}, kDwell);
      }
      const double carried = measure(world, regions).carried;
      const bool quiet = std::abs(carried - carried_prev) < cfg.simulation.transfer_rate * window &&
                         max_particle_speed(world) < cfg.simulation.rest_speed;
      carried_prev = carried;
      if (dwell >= cfg.simulation.dwell_min && quiet) break;
    }
    if (trace) trace->write_frame(world);

    res.in_plane = measure(world, regions);
    res.press_depth = press_samples ? press_sum / static_cast<double>(press_samples) : 0.0;
    const double nominal = cfg.effector.nominal_width();
    const double cap = cfg.effector.kind == EffectorKind::Cone ? 2.0 * cfg.effector.sheet_radius : nominal;
    const double width = cfg.effector.sheet.rigid && cfg.effector.kind == EffectorKind::Ladle
                             ? nominal
                             : effective_width(nominal, cap, res.press_depth, cfg.capture);
    res.lateral_coverage =
        lateral_coverage(width, cfg.container, cfg.effective_sweep_depth(), cfg.capture, nominal);
    // Powder outside the covered width never leaves the bowl.
    const MassAccounting& m = res.in_plane;
    res.delivered_fraction = scoop_fraction(std::clamp(m.delivered, 0.0, 1.0), res.lateral_coverage);
    res.carried_end_fraction = scoop_fraction(std::clamp(m.carried, 0.0, 1.0), res.lateral_coverage);
    res.spilled_fraction = m.spilled;
    res.residue_fraction = m.residue + (1.0 - res.lateral_coverage) * (m.delivered + m.carried);
    res.max_boundary_penetration = world.stats.max_boundary_penetration;
    res.max_coulomb_excess = world.stats.max_coulomb_excess;
    res.max_sheet_strain = std::max(max_strain, max_segment_strain(*world.sheet));
  } catch (const SimulationAborted& e) {
    res.aborted = true;
    res.reason = std::string("instability: ") + e.what();
  } catch (const std::exception& e) {
    res.aborted = true;
    res.reason = e.what();
  }
  return finish();
}

CellSummary summarize_cell(const RunConfig& c, const std::vector<ScoopTrialResult>& trials) {
  CellSummary s;
  s.scenario = c.scenario_name;
  s.container_diameter = c.container.inner_diameter;
  s.effector = c.effector.sheet.material_name;
  s.effector_width = c.effector.nominal_width();
  s.material = c.granular.material_name;
  s.trials = static_cast<int>(trials.size());
  if (is_not_insertable(c)) {
    s.status = "not_insertable";
    s.trials = 0;
    return s;
  }
  std::vector<const ScoopTrialResult*> ok;
  for (const auto& t : trials) {
    if (t.aborted) {
      ++s.aborted;
    } else {
      ok.push_back(&t);
    }
  }
  s.status = ok.empty() ? "failed" : (s.aborted ? "partial" : "ok");
  if (ok.empty()) return s;
  const double n = static_cast<double>(ok.size());
  for (const auto* t : ok) {
    s.delivered_mean += t->delivered_fraction;
    s.residue_mean += t->residue_fraction;
    s.spilled_mean += t->spilled_fraction;
    s.carried_end_mean += t->carried_end_fraction;
    s.coverage_mean += t->lateral_coverage;
  }
  s.delivered_mean /= n;
  s.residue_mean /= n;
  s.spilled_mean /= n;
  s.carried_end_mean /= n;
  s.coverage_mean /= n;
  if (ok.size() > 1) {
    double ss = 0.0;
    for (const auto* t : ok) ss += (t->delivered_fraction - s.delivered_mean) * (t->delivered_fraction - s.delivered_mean);
    s.delivered_std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

SweepResult run_sweep(const std::vector<RunConfig>& matrix, int jobs) {
  struct Task {
    std::size_t cell;
    int trial;
  };
  std::vector<Task> tasks;
  std::vector<std::size_t> first_task(matrix.size());
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    matrix[c].validate();
    first_task[c] = tasks.size();
    if (is_not_insertable(matrix[c])) continue;
    for (int t = 0; t < matrix[c].trials; ++t) tasks.push_back({c, t});
  }

  std::vector<ScoopTrialResult> results(tasks.size());
  FillCache cache;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      TrialOptions opt;
      opt.fill_cache = &cache;
      results[i] = run_trial(matrix[tasks[i].cell], tasks[i].trial, opt);
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(1, tasks.size()))));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  SweepResult out;
  out.trials = results;
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    const std::size_t begin = first_task[c];
    const std::size_t end = c + 1 < matrix.size() ? first_task[c + 1] : tasks.size();
    const std::vector<ScoopTrialResult> cell(results.begin() + static_cast<long>(begin),
                                             results.begin() + static_cast<long>(end));
    out.cells.push_back(summarize_cell(matrix[c], cell));
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_results_csv(const std::vector<ScoopTrialResult>& trials, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "scenario,container_D_mm,effector,effector_d_mm,material,trial,seed,delivered_fraction,residue_fraction,"
         "spilled_fraction,carried_end_fraction,lateral_coverage,aborted,reason\n";
  out << std::fixed;
  for (const auto& t : trials) {
    out << csv_escape(t.scenario) << ',' << std::setprecision(2) << t.container_diameter * 1e3 << ','
        << csv_escape(t.effector) << ',' << t.effector_width * 1e3 << ',' << csv_escape(t.material) << ','
        << t.trial_index << ',' << t.seed << ',' << std::setprecision(6) << t.delivered_fraction << ','
        << t.residue_fraction << ',' << t.spilled_fraction << ',' << t.carried_end_fraction << ','
        << t.lateral_coverage << ',' << (t.aborted ? 1 : 0) << ',' << csv_escape(t.reason) << '\n';
  }
}

void write_summary_csv(const std::vector<CellSummary>& cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "scenario,container_D_mm,effector,effector_d_mm,material,status,trials,aborted,delivered_mean,"
         "delivered_std,residue_mean,spilled_mean,carried_end_mean,lateral_coverage_mean\n";
  out << std::fixed;
  for (const auto& c : cells) {
    out << csv_escape(c.scenario) << ',' << std::setprecision(2) << c.container_diameter * 1e3 << ','
        << csv_escape(c.effector) << ',' << c.effector_width * 1e3 << ',' << csv_escape(c.material) << ','
        << c.status << ',' << c.trials << ',' << c.aborted << ',' << std::setprecision(6) << c.delivered_mean << ','
        << c.delivered_std << ',' << c.residue_mean << ',' << c.spilled_mean << ',' << c.carried_end_mean << ','
        << c.coverage_mean << '\n';
  }
}

void write_summary_md(const std::vector<CellSummary>& cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "| scenario | D (mm) | effector | d (mm) | material | delivered mean | delivered std | residue | spilled "
         "| coverage | status |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  out << std::fixed;
  for (const auto& c : cells) {
    out << "| " << c.scenario << " | " << std::setprecision(1) << c.container_diameter * 1e3 << " | " << c.effector
        << " | " << std::setprecision(2) << c.effector_width * 1e3 << " | " << c.material << " | ";
    if (c.status == "not_insertable" || c.status == "failed") {
      out << "- | - | - | - | - | " << c.status << " |\n";
      continue;
    }
    out << std::setprecision(4) << c.delivered_mean << " | " << c.delivered_std << " | " << c.residue_mean << " | "
        << c.spilled_mean << " | " << c.coverage_mean << " | " << c.status << " |\n";
  }
}

std::vector<RunConfig> experiment_matrix(int experiment) {
  const double r = 0.050;
  const double d_min = min_practical_diameter(r);
  auto cell = [&](const std::string& scenario, double D, const std::string& sheet, double d,
                  const std::string& material) {
    RunConfig c;
    c.scenario_name = scenario;
    c.container = make_container(D);
    c.granular = granular_preset(material);
    c.effector.sheet = sheet_preset(sheet);
    c.effector.kind = sheet == "silicone_ladle" ? EffectorKind::Ladle : EffectorKind::Cone;
    c.effector.sheet_radius = r;
    c.effector.bottom_diameter = d;
    return c;
  };
  std::vector<RunConfig> m;
  switch (experiment) {
    case 1:
      for (double D : {0.110, 0.093, 0.080, 0.067}) {
        for (double d : {0.090, 0.080, d_min}) m.push_back(cell("exp1", D, "pp_sheet", d, "flour"));
      }
      break;
    case 2:
      for (double D : {0.083, 0.067}) {
        const double d = D > 0.07 ? 0.080 : d_min;
        for (const char* sheet : {"pp_sheet", "sus304_sheet", "silicone_ladle"}) {
          m.push_back(cell("exp2", D, sheet, d, "flour"));
        }
      }
      break;
    case 3:
      for (const char* material : {"flour", "coffee", "rice"}) m.push_back(cell("exp3", 0.110, "pp_sheet", 0.090, material));
      break;
    default:
      throw std::invalid_argument("unknown experiment " + std::to_string(experiment) + "; available: 1, 2, 3");
  }
  return m;
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("CONESCOOP_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace conescoop
