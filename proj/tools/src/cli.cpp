#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "conescoop/harness.hpp"

namespace conescoop {
namespace {

struct ConeArgs {
  double sheet_radius_mm = 50.0;
  std::optional<double> container_mm;
  double phi_min_deg = 90.0;
};

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  int trial = 0;
  std::string trace;
  std::string out;
  std::string export_plan;
};

struct SweepArgs {
  std::optional<int> experiment;
  std::string matrix;
  int jobs = 1;
  std::string out;
  std::optional<int> trials;
};

struct PlanArgs {
  std::string config;
  std::string out;
};

int cmd_cone(const ConeArgs& a, std::ostream& out) {
  const double R = a.sheet_radius_mm;
  const double phi_min = deg_to_rad(a.phi_min_deg);
  std::optional<double> theta_min;
  if (a.container_mm) theta_min = min_insertion_angle(R, *a.container_mm);

  out << std::setw(10) << "d_mm" << std::setw(10) << "theta_deg" << std::setw(10) << "phi_deg" << std::setw(18)
      << "rigid_insertable" << std::setw(22) << "min_slide_angle_deg" << '\n';
  auto row = [&](const ConeConfig& c) {
    out << std::fixed << std::setprecision(2) << std::setw(10) << c.bottom_diameter() << std::setw(10)
        << rad_to_deg(c.slide_angle()) << std::setw(10) << rad_to_deg(c.vertex_angle());
    if (a.container_mm) {
      const auto v = insertability(c, *a.container_mm);
      out << std::setw(18) << (v.rigid_insertable ? "yes" : "no") << std::setw(22) << rad_to_deg(*theta_min);
    } else {
      out << std::setw(18) << "-" << std::setw(22) << "-";
    }
    out << '\n';
  };
  for (double deg : {0.0, 36.0, 72.0, 105.0}) row(ConeConfig::from_slide_angle(R, deg_to_rad(deg)));
  row(ConeConfig::from_bottom_diameter(R, min_practical_diameter(R, phi_min)));
  return 0;
}

void ensure_parent(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

RunConfig load_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

int cmd_run(const RunArgs& a, std::ostream& out) {
  const RunConfig cfg = load_or_default(a.config);
  if (!a.export_plan.empty()) {
    ensure_parent(a.export_plan);
    TrajectoryParams tp = cfg.trajectory;
    tp.plate = scene_layout(cfg.container).target;
    write_plan_csv(plan_scoop(cfg.container, cfg.effector.tool_geometry(), tp), a.export_plan);
  }
  TrialOptions opt;
  opt.seed_override = a.seed;
  if (!a.trace.empty()) {
    ensure_parent(a.trace);
    opt.trace_path = a.trace;
  }
  const ScoopTrialResult r = run_trial(cfg, a.trial, opt);

  const auto dir = resolve_out_dir(a.out.empty() ? std::nullopt : std::optional<std::string>(a.out));
  write_results_csv({r}, dir / "results.csv");
  out << std::fixed << std::setprecision(4) << "delivered " << r.delivered_fraction << "  residue "
      << r.residue_fraction << "  spilled " << r.spilled_fraction << "  carried " << r.carried_end_fraction
      << "  coverage " << r.lateral_coverage << "  seed " << r.seed << "  " << std::setprecision(1) << r.wall_time
      << " s\n";
  out << std::setprecision(4) << "in-plane: delivered " << r.in_plane.delivered << "  residue " << r.in_plane.residue
      << "  spilled " << r.in_plane.spilled << "  carried " << r.in_plane.carried << "  press " << std::setprecision(2)
      << r.press_depth * 1e3 << " mm  max penetration " << r.max_boundary_penetration * 100.0 << "% of radius\n";
  out << "results: " << (dir / "results.csv").string() << '\n';
  if (r.aborted) {
    out << "aborted: " << r.reason << '\n';
    return 3;
  }
  return 0;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  if (a.experiment.has_value() == !a.matrix.empty()) {
    throw CLI::ValidationError("sweep", "give exactly one of --experiment or --matrix");
  }
  std::vector<RunConfig> matrix = a.experiment ? experiment_matrix(*a.experiment) : load_matrix(a.matrix);
  if (a.trials) {
    for (auto& c : matrix) c.trials = *a.trials;
  }
  const SweepResult res = run_sweep(matrix, a.jobs);
  const auto dir = resolve_out_dir(a.out.empty() ? std::nullopt : std::optional<std::string>(a.out));
  write_results_csv(res.trials, dir / "results.csv");
  write_summary_csv(res.cells, dir / "summary.csv");
  write_summary_md(res.cells, dir / "summary.md");
  out << std::fixed;
  for (const auto& c : res.cells) {
    out << std::setprecision(0) << "D=" << c.container_diameter * 1e3 << " " << c.effector << " d="
        << std::setprecision(2) << c.effector_width * 1e3 << " " << c.material << ": ";
    if (c.status == "not_insertable") {
      out << "not_insertable\n";
    } else {
      out << std::setprecision(4) << c.delivered_mean << " +- " << c.delivered_std << " (" << c.status << ")\n";
    }
  }
  out << "wrote " << dir.string() << "/{results.csv,summary.csv,summary.md}\n";
  return 0;
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const RunConfig cfg = load_or_default(a.config);
  TrajectoryParams tp = cfg.trajectory;
  tp.plate = scene_layout(cfg.container).target;
  const TrajectoryPlan plan = plan_scoop(cfg.container, cfg.effector.tool_geometry(), tp);
  ensure_parent(a.out);
  write_plan_csv(plan, a.out);
  out << "plan: " << plan.phases.size() << " phases, " << std::setprecision(3) << plan.total_duration() << " s -> "
      << a.out << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"conescoop: reconfigurable cone scooping simulator"};
  app.require_subcommand(1);

  ConeArgs cone;
  auto* c = app.add_subcommand("cone", "cone design calculator");
  c->add_option("--sheet-radius-mm", cone.sheet_radius_mm, "flat sheet radius R")->capture_default_str();
  c->add_option("--container-diameter-mm", cone.container_mm, "container inner diameter D");
  c->add_option("--phi-min-deg", cone.phi_min_deg, "practical vertex-angle floor")->capture_default_str();

  RunArgs run;
  auto* r = app.add_subcommand("run", "run a single trial");
  r->add_option("--config", run.config, "run config (JSON)");
  r->add_option("--seed", run.seed, "override the trial seed");
  r->add_option("--trial", run.trial, "trial index")->capture_default_str();
  r->add_option("--trace", run.trace, "write a CSV trace of frames");
  r->add_option("--out", run.out, "output directory");
  r->add_option("--export-plan", run.export_plan, "also write the waypoint CSV");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "run an experiment matrix");
  s->add_option("--experiment", sweep.experiment, "preset experiment")->check(CLI::IsMember({1, 2, 3}));
  s->add_option("--matrix", sweep.matrix, "matrix file (JSON)");
  s->add_option("--jobs", sweep.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--out", sweep.out, "output directory");
  s->add_option("--trials", sweep.trials, "override trials per cell")->check(CLI::PositiveNumber);

  PlanArgs plan;
  auto* p = app.add_subcommand("export-plan", "write the waypoint list as CSV");
  p->add_option("--config", plan.config, "run config (JSON)");
  p->add_option("--out", plan.out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*c) return cmd_cone(cone, out);
    if (*r) return cmd_run(run, out);
    if (*s) return cmd_sweep(sweep, out);
    if (*p) return cmd_plan(plan, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int cli_main(int argc, char** argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace conescoop
