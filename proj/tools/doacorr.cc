// doacorr: single runs, experiment presets and plot regeneration.
//
// Exit codes: 0 success, 1 invalid arguments or configuration, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "doacorr/config_file.h"
#include "doacorr/experiment.h"
#include "doacorr/persistence.h"

namespace fs = std::filesystem;
using namespace doacorr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool bias_on = false;
  bool bias_off = false;
};

const std::map<std::string, std::string> kHelp = {
    {"theta-est", "initial DOA estimate, degrees (15)"},
    {"seed", "run seed; experiments use seed + run index (1)"},
    {"duration", "scene length, simulated seconds (90)"},
    {"scene", "scene preset (two-source|near-interference|three-source) or scene file"},
    {"scene-seed", "seed for the synthetic source signals and noise (1)"},
    {"out", "output directory (out)"},
    {"runs", "override the run count of every experiment cell"},
    {"workers", "parallel trials per cell (hardware threads)"},
    {"eta", "corrector step size (0.1)"},
    {"beta-m", "first-moment decay (0.9)"},
    {"beta-v", "second-moment decay (0.999)"},
    {"epsilon", "denominator guard (1e-8)"},
    {"warmup", "seconds before the corrector steps (10)"},
    {"q-ceiling", "quality ceiling for the minimized loss, dB (100)"},
    {"alpha", "quality smoothing factor (0.9)"},
    {"t-h", "tick period, seconds (0.1)"},
    {"t-w", "quality window, seconds (3)"},
    {"t-vad", "VAD sub-window, seconds (0.032)"},
    {"vad-threshold-db", "VAD energy threshold, dBFS (-45)"},
    {"estimator", "oracle|noisy-oracle (noisy-oracle)"},
    {"noise-sigma", "noisy-oracle standard deviation, dB (2.5)"},
    {"dropout-prob", "probability a tick's output chunk is zeroed (0)"},
    {"phase-tolerance", "mask phase tolerance, multiples of pi (0.35)"},
    {"mask-floor", "gain for rejected bins (0.05)"},
    {"reference-channel", "reference microphone index (0)"},
    {"aliasing-policy", "wrapped-compare|lowpass-only (wrapped-compare)"},
    {"window-len", "STFT window, power of two; hop is a quarter (1024)"},
};

void AddConfigFlags(CLI::App *cmd, ConfigFlags &flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file (flags override it)")
      ->check(CLI::ExistingFile);
  for (const auto &key : CliConfigKeys()) {
    if (key == "bias-correction") continue;
    const auto help = kHelp.find(key);
    cmd->add_option("--" + key, flags.values[key], help == kHelp.end() ? "" : help->second);
  }
  cmd->add_flag("--bias-correction", flags.bias_on, "enable Adam bias correction");
  cmd->add_flag("--no-bias-correction", flags.bias_off, "disable Adam bias correction (default)");
}

CliConfig Resolve(CLI::App *cmd, const ConfigFlags &flags) {
  CliConfig config;
  config.workers = std::max(1u, std::thread::hardware_concurrency());
  if (!flags.config_path.empty()) ApplyConfigFile(config, flags.config_path);
  for (const auto &[key, value] : flags.values)
    if (cmd->count("--" + key) > 0) ApplyConfigValue(config, key, value);
  if (flags.bias_on && flags.bias_off)
    throw std::invalid_argument("--bias-correction and --no-bias-correction are exclusive");
  if (flags.bias_on) ApplyConfigValue(config, "bias-correction", "true");
  if (flags.bias_off) ApplyConfigValue(config, "bias-correction", "false");
  config.Validate();
  return config;
}

// Adds `files` to <dir>/manifest.json, keeping whatever earlier runs listed.
void UpdateRunManifest(const fs::path &dir, const std::vector<std::string> &files) {
  const fs::path path = dir / "manifest.json";
  nlohmann::ordered_json manifest;
  if (fs::exists(path)) {
    try {
      manifest = nlohmann::ordered_json::parse(ReadFile(path.string()));
    } catch (const nlohmann::json::exception &e) {
      throw std::runtime_error(path.string() + ": corrupt manifest: " + e.what());
    }
  }
  manifest["experiment"] = "run";
  std::vector<std::string> all = manifest.value("files", std::vector<std::string>{});
  for (const auto &f : files)
    if (std::find(all.begin(), all.end(), f) == all.end()) all.push_back(f);
  std::sort(all.begin(), all.end());
  manifest["files"] = all;
  WriteFileAtomic(path.string(), manifest.dump(2) + "\n");
}

int CmdRun(const CliConfig &config) {
  const ScenePlan scene = ResolveScene(config.scene_source, config.scene);
  const RunRecord rec = RunTrial(scene, config.trial, config.theta_est, config.seed);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  const std::string stem = "run-" + std::to_string(config.seed);
  WriteFileAtomic((dir / (stem + ".csv")).string(), RunCsv(rec));
  WriteFileAtomic((dir / (stem + ".json")).string(), RunSummaryJson(rec).dump(2) + "\n");
  WriteFileAtomic((dir / (stem + ".svg")).string(), PlotCsvPath((dir / (stem + ".csv")).string()));
  UpdateRunManifest(dir, {stem + ".csv", stem + ".json", stem + ".svg"});
  std::printf("%s: %s, final-third mean theta %.2f deg (true %.2f)\n", stem.c_str(),
              rec.good ? "good" : "not good", rec.final_third_mean_theta, rec.true_doa);
  for (const auto &w : rec.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

int CmdExperiment(const std::string &preset, const CliConfig &config) {
  const ExperimentPlan plan = BuildExperiment(preset, config.trial, config.scene, config.runs);
  ExperimentOptions opts;
  opts.out_dir = config.out_dir;
  opts.master_seed = config.seed;
  opts.workers = config.workers;
  opts.on_cell = [](const CellResult &r) {
    std::printf("%s: %zu/%zu good\n", r.label.c_str(), r.stats.good_run_count, r.stats.n_runs);
    std::fflush(stdout);
  };
  RunExperiment(plan, opts);
  std::printf("wrote %s\n", (fs::path(config.out_dir) / plan.name / "manifest.json").c_str());
  return kExitOk;
}

int CmdPlot(const std::string &path) {
  const std::string svg = PlotCsvPath(path);
  fs::path target = fs::is_directory(path) ? fs::path(path) / "plot.svg"
                                           : fs::path(path).replace_extension(".svg");
  WriteFileAtomic(target.string(), svg);
  std::printf("wrote %s\n", target.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Closed-loop DOA correction simulator"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App *run = app.add_subcommand("run", "run one closed-loop trial");
  AddConfigFlags(run, run_flags);

  ConfigFlags exp_flags;
  std::string preset;
  CLI::App *experiment = app.add_subcommand("experiment", "run an experiment preset");
  std::string presets;
  for (const auto &p : ExperimentPresetNames()) presets += (presets.empty() ? "" : "|") + p;
  experiment->add_option("preset", preset, presets)->required();
  AddConfigFlags(experiment, exp_flags);

  std::string plot_path;
  CLI::App *plot = app.add_subcommand("plot", "regenerate an SVG from run or cell CSVs");
  plot->add_option("path", plot_path, "cell directory or run CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  CLI::App *active = run->parsed() ? run : experiment->parsed() ? experiment : plot;
  try {
    if (active == plot) return CmdPlot(plot_path);
    if (active == run) return CmdRun(Resolve(run, run_flags));
    return CmdExperiment(preset, Resolve(experiment, exp_flags));
  } catch (const std::invalid_argument &e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), active->help().c_str());
    return kExitInvalid;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
