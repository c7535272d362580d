#include "doacorr/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "doacorr/persistence.h"
#include "doacorr/svg_plot.h"

namespace doacorr {

namespace fs = std::filesystem;

namespace {

std::string Join(const std::vector<std::string> &names) {
  std::string out;
  for (const auto &n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

// "15" for whole numbers, "0.01" otherwise; "-15" stays readable as a path.
std::string Label(double v) {
  char buf[32];
  if (v == std::floor(v))
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  else
    std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

CellSpec Cell(std::string label, const ScenePlan &scene, const TrialConfig &config,
              double theta_est, std::size_t runs) {
  return {std::move(label), scene, config, theta_est, runs};
}

nlohmann::ordered_json CellJson(const CellSpec &cell, const std::string &status,
                                const std::vector<std::string> &files, std::size_t good) {
  nlohmann::ordered_json j;
  j["label"] = cell.label;
  j["status"] = status;
  j["theta_est"] = cell.theta_est;
  j["true_doa"] = cell.scene.sources.front().true_doa_deg;
  j["runs"] = cell.runs;
  if (status == "complete") j["good_runs"] = good;
  j["files"] = files;
  return j;
}

}  // namespace

std::string PlotCsvPath(const std::string &path) {
  const fs::path p(path);
  TrajectoryPlot plot;
  if (fs::is_directory(p)) {
    const fs::path aggregate = p / "aggregate.csv";
    if (!fs::exists(aggregate)) {
      // A directory of run CSVs without an aggregate: aggregate them here.
      std::vector<fs::path> runs;
      for (const auto &e : fs::directory_iterator(p))
        if (e.path().extension() == ".csv") runs.push_back(e.path());
      if (runs.empty()) throw std::runtime_error(path + ": no CSV files found");
      std::sort(runs.begin(), runs.end());
      std::vector<std::vector<RunCsvRow>> rows;
      for (const auto &r : runs) rows.push_back(ReadRunCsv(r.string()));
      std::vector<AggregateRow> agg;
      try {
        agg = AggregateRunCsvs(rows);
      } catch (const std::invalid_argument &e) {
        throw std::runtime_error(path + ": " + e.what());
      }
      for (const auto &r : agg) {
        plot.time_s.push_back(r.time_s);
        plot.mean_deg.push_back(r.mean_theta);
        plot.std_deg.push_back(r.std_theta);
      }
    } else {
      for (const auto &r : ReadAggregateCsv(aggregate.string())) {
        plot.time_s.push_back(r.time_s);
        plot.mean_deg.push_back(r.mean_theta);
        plot.std_deg.push_back(r.std_theta);
      }
    }
    plot.title = fs::absolute(p).lexically_normal().filename().string();
    if (plot.title.empty()) plot.title = fs::absolute(p).lexically_normal().parent_path().filename().string();
    plot.title += " (mean +/- std)";
  } else if (fs::exists(p)) {
    for (const auto &r : ReadRunCsv(path)) {
      plot.time_s.push_back(r.time_s);
      plot.mean_deg.push_back(r.theta_deg);
    }
    plot.title = p.stem().string();
  } else {
    throw std::runtime_error(path + ": no such file or directory");
  }
  return RenderTrajectorySvg(plot);
}

ScenePlan MakeSpeechScene(const std::vector<double> &doas_deg, std::size_t soi,
                          const SceneOptions &options) {
  if (doas_deg.empty()) throw std::invalid_argument("scene needs at least one source");
  if (soi >= doas_deg.size()) throw std::invalid_argument("soi index out of range");
  if (!(options.duration_s > 0.0)) throw std::invalid_argument("scene duration must be positive");
  ScenePlan plan;
  plan.fs = options.fs;
  plan.duration_s = options.duration_s;
  plan.seed = options.seed;
  std::vector<SourceSpec> sources;
  for (std::size_t i = 0; i < doas_deg.size(); ++i) {
    const std::uint64_t signal_seed = options.seed * 1000 + i + 1;
    sources.push_back({SynthSpeechLike(options.duration_s, options.fs, signal_seed), doas_deg[i],
                       1.0, options.fs});
  }
  std::rotate(sources.begin(), sources.begin() + static_cast<std::ptrdiff_t>(soi),
              sources.begin() + static_cast<std::ptrdiff_t>(soi) + 1);
  plan.sources = std::move(sources);
  plan.Validate();
  return plan;
}

std::vector<std::string> ScenePresetNames() {
  return {"two-source", "near-interference", "three-source"};
}

ScenePlan ScenePreset(const std::string &name, const SceneOptions &options) {
  if (name == "two-source") return MakeSpeechScene({0.0, 90.0}, 0, options);
  if (name == "near-interference") return MakeSpeechScene({0.0, 90.0}, 1, options);
  if (name == "three-source") return MakeSpeechScene({90.0, 180.0, 0.0}, 0, options);
  throw std::invalid_argument("unknown scene preset '" + name + "' (valid: " +
                              Join(ScenePresetNames()) + ")");
}

std::vector<std::string> ExperimentPresetNames() {
  return {"eta-sweep", "bias-ablation", "theta-sweep", "near-interference", "three-source"};
}

ExperimentPlan BuildExperiment(const std::string &preset, const TrialConfig &base,
                               const SceneOptions &scene, std::optional<std::size_t> runs) {
  base.Validate();
  if (runs && *runs == 0) throw std::invalid_argument("runs must be at least 1");
  ExperimentPlan plan;
  plan.name = preset;
  auto n = [&](std::size_t def) { return runs.value_or(def); };

  if (preset == "eta-sweep") {
    const ScenePlan s = ScenePreset("two-source", scene);
    for (double eta : {0.01, 0.1, 0.2, 0.3}) {
      TrialConfig c = base;
      c.corrector.eta = eta;
      plan.cells.push_back(Cell("eta-" + Label(eta), s, c, 15.0, n(5)));
    }
  } else if (preset == "bias-ablation") {
    const ScenePlan s = ScenePreset("two-source", scene);
    for (bool on : {false, true}) {
      TrialConfig c = base;
      c.corrector.bias_correction = on;
      plan.cells.push_back(Cell(on ? "bias-on" : "bias-off", s, c, 15.0, n(30)));
    }
  } else if (preset == "theta-sweep") {
    const ScenePlan s = ScenePreset("two-source", scene);
    for (double th : {1.0, 5.0, 10.0, 15.0, 20.0, 25.0})
      plan.cells.push_back(Cell("theta-" + Label(th), s, base, th, n(30)));
  } else if (preset == "near-interference") {
    plan.cells.push_back(
        Cell("soi-90-theta-105", ScenePreset("near-interference", scene), base, 105.0, n(5)));
  } else if (preset == "three-source") {
    // Each source takes a turn as the SOI, with the estimate 15 degrees off.
    const std::vector<double> doas = {90.0, 180.0, 0.0};
    const std::vector<double> estimates = {105.0, 195.0, -15.0};
    for (std::size_t i = 0; i < doas.size(); ++i)
      plan.cells.push_back(Cell("soi-" + Label(doas[i]) + "-theta-" + Label(estimates[i]),
                                MakeSpeechScene(doas, i, scene), base, estimates[i], n(5)));
  } else {
    throw std::invalid_argument("unknown experiment preset '" + preset + "' (valid: " +
                                Join(ExperimentPresetNames()) + ")");
  }
  return plan;
}

std::vector<RunRecord> RunCell(const CellSpec &cell, std::uint64_t master_seed, unsigned workers) {
  if (cell.runs == 0) throw std::invalid_argument("cell " + cell.label + " has no runs");
  const Mixture mixture = RenderMixture(cell.scene);
  std::vector<RunRecord> records(cell.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cell.runs;) {
      try {
        records[k] = RunTrial(cell.scene, mixture, cell.config, cell.theta_est, master_seed + k);
        records[k].run_id = cell.label + "/run-" + std::to_string(k);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = cell.runs;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cell.runs)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return records;
}

std::vector<CellResult> RunExperiment(const ExperimentPlan &plan, const ExperimentOptions &options) {
  if (plan.cells.empty()) throw std::invalid_argument("experiment has no cells");
  const fs::path root = fs::path(options.out_dir) / plan.name;
  fs::create_directories(root);

  nlohmann::ordered_json manifest;
  manifest["experiment"] = plan.name;
  manifest["master_seed"] = options.master_seed;
  manifest["status"] = "incomplete";
  manifest["cells"] = nlohmann::ordered_json::array();
  for (const auto &cell : plan.cells) manifest["cells"].push_back(CellJson(cell, "incomplete", {}, 0));
  const std::string manifest_path = (root / "manifest.json").string();
  auto save = [&] { WriteFileAtomic(manifest_path, manifest.dump(2) + "\n"); };
  save();

  std::vector<CellResult> results;
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    const CellSpec &cell = plan.cells[c];
    const fs::path dir = root / cell.label;
    fs::create_directories(dir);
    const auto records = RunCell(cell, options.master_seed, options.workers);

    std::vector<std::string> files;
    for (std::size_t k = 0; k < records.size(); ++k) {
      const std::string stem = "run-" + std::to_string(k);
      WriteFileAtomic((dir / (stem + ".csv")).string(), RunCsv(records[k]));
      WriteFileAtomic((dir / (stem + ".json")).string(), RunSummaryJson(records[k]).dump(2) + "\n");
      files.push_back(cell.label + "/" + stem + ".csv");
      files.push_back(cell.label + "/" + stem + ".json");
    }
    CellResult result{cell.label, Aggregate(records)};
    WriteFileAtomic((dir / "aggregate.csv").string(), AggregateCsv(result.stats));
    files.push_back(cell.label + "/aggregate.csv");

    WriteFileAtomic((dir / "plot.svg").string(), PlotCsvPath(dir.string()));
    files.push_back(cell.label + "/plot.svg");

    manifest["cells"][c] = CellJson(cell, "complete", files, result.stats.good_run_count);
    save();
    if (options.on_cell) options.on_cell(result);
    results.push_back(std::move(result));
  }
  manifest["status"] = "complete";
  save();
  return results;
}

}  // namespace doacorr
