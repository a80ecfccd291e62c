#pragma once

// Batch runner for scooping trials: run configs, seeded trials, parallel
// sweeps with per-cell aggregation and CSV / Markdown output.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conescoop/capture.hpp"
#include "conescoop/cone_geometry.hpp"
#include "conescoop/engine.hpp"
#include "conescoop/fill.hpp"
#include "conescoop/scene.hpp"
#include "conescoop/sheet.hpp"
#include "conescoop/trajectory.hpp"

namespace conescoop {

enum class EffectorKind { Cone, Ladle };

struct EffectorConfig {
  EffectorKind kind = EffectorKind::Cone;
  SheetSpec sheet = sheet_preset("pp_sheet");
  double sheet_radius = 0.050;
  double bottom_diameter = 0.090;
  LadleProfile ladle;
  std::size_t segments = 16;
  double anisotropy_gain = 60.0;
  double damping_ratio = 0.7;

  /// Scooping width: cone bottom diameter or ladle width.
  double nominal_width() const { return kind == EffectorKind::Cone ? bottom_diameter : ladle.width; }
  ConeConfig cone() const { return ConeConfig::from_bottom_diameter(sheet_radius, bottom_diameter); }
  ToolGeometry tool_geometry() const;
};

struct SimulationConfig {
  double dt = 2e-5;
  FillOptions fill;
  /// Dump dwell: shake until the carried fraction changes by less than
  /// `transfer_rate` per second, between dwell_min and dwell_max.
  double dwell_min = 0.3;
  double dwell_max = 1.5;
  double transfer_rate = 0.01;
  double rest_speed = 0.05;
  double capture_distance = 0.002;
  /// Cells whose cone is wider than this multiple of D are skipped.
  double not_insertable_ratio = 1.2;
  std::size_t trace_every = 250;
  double particle_blowup_speed = 10.0;
  double sheet_blowup_speed = 50.0;
  double sheet_wall_stiffness = 5000.0;
};

struct RunConfig {
  std::string scenario_name = "custom";
  ContainerSpec container = make_container(0.110);
  EffectorConfig effector;
  GranularSpec granular = granular_preset("flour");
  TrajectoryParams trajectory;
  CoverageModel capture;
  /// Height above the bowl bottom where the cross-width is compared with the
  /// edge. Clamped to the rim depth; 0 means the rim.
  double sweep_depth = 0.027;
  SimulationConfig simulation;
  int trials = 10;
  std::uint64_t base_seed = 20240501;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  double effective_sweep_depth() const {
    return sweep_depth > 0.0 ? std::min(sweep_depth, container.rim_depth) : container.rim_depth;
  }
};

/// Parses the JSON run-config document. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>");
std::string dump_run_config(const RunConfig& config);
/// A matrix file: {"defaults": {...}, "cells": [{...}, ...]}; each cell is
/// merged over the defaults.
std::vector<RunConfig> load_matrix(const std::filesystem::path& path);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScoopTrialResult {
  std::string scenario;
  double container_diameter = 0.0;
  std::string effector;
  double effector_width = 0.0;
  std::string material;
  int trial_index = 0;
  std::uint64_t seed = 0;
  double delivered_fraction = 0.0;
  double residue_fraction = 0.0;
  double spilled_fraction = 0.0;
  double carried_end_fraction = 0.0;
  double lateral_coverage = 0.0;
  /// In-plane fractions before the coverage correction.
  MassAccounting in_plane;
  double press_depth = 0.0;
  double max_boundary_penetration = 0.0;
  double max_coulomb_excess = 0.0;
  double max_sheet_strain = 0.0;
  double wall_time = 0.0;
  bool aborted = false;
  std::string reason;

  double fraction_sum() const {
    return delivered_fraction + residue_fraction + spilled_fraction + carried_end_fraction;
  }
};

/// FNV-1a of the scenario name mixed with the base seed and trial index.
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& scenario, int trial_index);

class FillCache;

struct TrialOptions {
  std::optional<std::filesystem::path> trace_path;
  std::optional<std::uint64_t> seed_override;
  FillCache* fill_cache = nullptr;
  /// Called after every step with the current phase label ("dwell" after the plan ends).
  std::function<void(const ParticleWorld&, const std::string&)> observer;
};

/// Runs one trial. Simulation failures come back as aborted results.
ScoopTrialResult run_trial(const RunConfig& config, int trial_index, const TrialOptions& options = {});

/// Scene statics: floor under the bowl and a tray left of it at rim height.
struct SceneLayout {
  std::vector<StaticSegment> statics;
  PlateZone plate;
  PlateTarget target;
};
SceneLayout scene_layout(const ContainerSpec& container);

struct CellSummary {
  std::string scenario;
  double container_diameter = 0.0;
  std::string effector;
  double effector_width = 0.0;
  std::string material;
  std::string status;  // "ok", "not_insertable", "partial"
  int trials = 0;
  int aborted = 0;
  double delivered_mean = 0.0;
  double delivered_std = 0.0;
  double residue_mean = 0.0;
  double spilled_mean = 0.0;
  double carried_end_mean = 0.0;
  double coverage_mean = 0.0;
};

struct SweepResult {
  std::vector<CellSummary> cells;
  std::vector<ScoopTrialResult> trials;
};

bool is_not_insertable(const RunConfig& config);

/// Runs every trial of every cell on `jobs` workers. Results are ordered by
/// cell then trial, independent of the worker count.
SweepResult run_sweep(const std::vector<RunConfig>& matrix, int jobs);

/// Sample mean and standard deviation (n - 1) of delivered fractions of the
/// non-aborted trials.
CellSummary summarize_cell(const RunConfig& config, const std::vector<ScoopTrialResult>& trials);

void write_results_csv(const std::vector<ScoopTrialResult>& trials, const std::filesystem::path& path);
void write_summary_csv(const std::vector<CellSummary>& cells, const std::filesystem::path& path);
void write_summary_md(const std::vector<CellSummary>& cells, const std::filesystem::path& path);

/// Experiment presets 1-3.
std::vector<RunConfig> experiment_matrix(int experiment);

/// Output directory: explicit value, else CONESCOOP_OUT_DIR, else "out".
std::filesystem::path resolve_out_dir(const std::optional<std::string>& explicit_dir);

}  // namespace conescoop
