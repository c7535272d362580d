// Scene presets and the experiment grids built on top of RunTrial.

#ifndef DOACORR_EXPERIMENT_H_
#define DOACORR_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "doacorr/harness.h"

namespace doacorr {

struct SceneOptions {
  double duration_s = 90.0;
  std::uint64_t seed = 1;
  int fs = 16000;
};

// Speech-like sources at `doas_deg`, equal power; `soi` picks the target.
// Source i always gets the same signal, so moving the SOI between
// positions keeps the acoustic scene unchanged.
ScenePlan MakeSpeechScene(const std::vector<double> &doas_deg, std::size_t soi,
                          const SceneOptions &options);

// Scene presets accepted by ScenePreset(): "two-source" (SOI 0, interferer 90),
// "near-interference" (same scene, SOI 90), "three-source" (SOI 90; 180 and 0).
std::vector<std::string> ScenePresetNames();
ScenePlan ScenePreset(const std::string &name, const SceneOptions &options);

struct CellSpec {
  std::string label;
  ScenePlan scene;
  TrialConfig config;
  double theta_est = 0.0;
  std::size_t runs = 0;
};

struct ExperimentPlan {
  std::string name;
  std::vector<CellSpec> cells;
};

std::vector<std::string> ExperimentPresetNames();
// Throws std::invalid_argument listing the valid names for an unknown preset.
// `runs` overrides every cell's run count when set.
ExperimentPlan BuildExperiment(const std::string &preset, const TrialConfig &base,
                               const SceneOptions &scene, std::optional<std::size_t> runs = {});

// Runs one cell with seeds master_seed + k, k = 0..runs-1. Trials are
// independent, so up to `workers` of them run concurrently; results come
// back in seed order regardless.
std::vector<RunRecord> RunCell(const CellSpec &cell, std::uint64_t master_seed,
                               unsigned workers = 1);

struct CellResult {
  std::string label;
  TrajectoryStats stats;
};

struct ExperimentOptions {
  std::string out_dir = "out";
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  std::function<void(const CellResult &)> on_cell;
};

// SVG for a cell directory (its aggregate.csv, or the run CSVs in it) or a
// single run CSV. Reads only CSVs, so the same files give the same bytes.
std::string PlotCsvPath(const std::string &path);

// Writes out/<name>/<cell>/{run-<k>.csv,run-<k>.json,aggregate.csv,plot.svg}
// and out/<name>/manifest.json. The manifest is rewritten after every cell,
// so an interrupted grid leaves the unfinished cells marked incomplete.
std::vector<CellResult> RunExperiment(const ExperimentPlan &plan, const ExperimentOptions &options);

}  // namespace doacorr

#endif  // DOACORR_EXPERIMENT_H_
