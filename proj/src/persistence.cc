#include "doacorr/persistence.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace doacorr {

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  // Avoid "-0.000000" so identical values print identically.
  if (std::string(buf).find_first_not_of("-0.") == std::string::npos) {
    std::snprintf(buf, sizeof(buf), "%.*f", digits, 0.0);
  }
  return buf;
}

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseNumber(const std::string &s, const std::string &path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

nlohmann::ordered_json ToJson(const TrialConfig &config) {
  nlohmann::ordered_json j;
  j["beamformer"] = {
      {"phase_tolerance_rad", config.beamformer.phase_tolerance_rad},
      {"mask_floor", config.beamformer.mask_floor},
      {"reference_channel", config.beamformer.reference_channel},
      {"aliasing_policy", ToString(config.beamformer.aliasing_policy)},
  };
  j["quality"] = {
      {"t_h", config.quality.t_h},
      {"t_w", config.quality.t_w},
      {"t_vad", config.quality.t_vad},
      {"alpha", config.quality.alpha},
      {"vad_energy_threshold_db", config.quality.vad_energy_threshold_db},
      {"estimator", ToString(config.quality.estimator)},
      {"noise_sigma_db", config.quality.noise_sigma_db},
      {"dropout_prob", config.quality.dropout_prob},
  };
  j["corrector"] = {
      {"eta", config.corrector.eta},
      {"beta_m", config.corrector.beta_m},
      {"beta_v", config.corrector.beta_v},
      {"epsilon", config.corrector.epsilon},
      {"bias_correction", config.corrector.bias_correction},
      {"warmup_s", config.corrector.warmup_s},
      {"q_ceiling", config.corrector.q_ceiling},
  };
  j["stft"] = {{"window_len", config.window_len}, {"hop", config.hop}};
  return j;
}

nlohmann::ordered_json RunSummaryJson(const RunRecord &record) {
  nlohmann::ordered_json j;
  j["run_id"] = record.run_id;
  j["seed"] = record.seed;
  j["theta_est"] = record.theta_est;
  j["true_doa"] = record.true_doa;
  j["scene_digest"] = record.scene_digest;
  j["config"] = ToJson(record.config);
  j["good"] = record.good;
  j["final_third_mean_theta"] = record.final_third_mean_theta;
  j["warnings"] = record.warnings;
  return j;
}

std::string RunCsv(const RunRecord &record) {
  std::string out = std::string(kRunCsvHeader) + "\n";
  for (std::size_t i = 0; i < record.theta_series.size(); ++i) {
    const ThetaPoint &p = record.theta_series[i];
    out += Fixed(p.time_s, 3) + "," + Fixed(p.theta_deg, 6) + ",";
    if (i > 0 && i - 1 < record.quality_series.size()) {
      const QualitySample &q = record.quality_series[i - 1];
      if (q.raw_q_db) out += Fixed(*q.raw_q_db, 4);
      out += ",";
      if (q.smooth_q_db) out += Fixed(*q.smooth_q_db, 4);
      out += ",";
      out += q.vad_active ? "1" : "0";
    } else {
      out += ",,0";
    }
    out += "\n";
  }
  return out;
}

std::string AggregateCsv(const TrajectoryStats &stats) {
  std::string out = std::string(kAggregateCsvHeader) + "\n";
  for (std::size_t i = 0; i < stats.time_s.size(); ++i)
    out += Fixed(stats.time_s[i], 3) + "," + Fixed(stats.mean_theta[i], 6) + "," +
           Fixed(stats.std_theta[i], 6) + "\n";
  return out;
}

std::vector<RunCsvRow> ReadRunCsv(const std::string &path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines.front() != kRunCsvHeader)
    throw std::runtime_error(path + ":1: not a run CSV (expected header '" +
                             std::string(kRunCsvHeader) + "')");
  std::vector<RunCsvRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = SplitCsv(lines[i]);
    if (f.size() != 5)
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected 5 fields, got " +
                               std::to_string(f.size()));
    RunCsvRow row;
    row.time_s = ParseNumber(f[0], path, i + 1);
    row.theta_deg = ParseNumber(f[1], path, i + 1);
    if (!f[2].empty()) row.raw_q_db = ParseNumber(f[2], path, i + 1);
    if (!f[3].empty()) row.smooth_q_db = ParseNumber(f[3], path, i + 1);
    if (f[4] != "0" && f[4] != "1")
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": vad_active must be 0 or 1");
    row.vad_active = f[4] == "1";
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  return rows;
}

std::vector<AggregateRow> ReadAggregateCsv(const std::string &path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines.front() != kAggregateCsvHeader)
    throw std::runtime_error(path + ":1: not an aggregate CSV (expected header '" +
                             std::string(kAggregateCsvHeader) + "')");
  std::vector<AggregateRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = SplitCsv(lines[i]);
    if (f.size() != 3)
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected 3 fields, got " +
                               std::to_string(f.size()));
    rows.push_back({ParseNumber(f[0], path, i + 1), ParseNumber(f[1], path, i + 1),
                    ParseNumber(f[2], path, i + 1)});
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  return rows;
}

std::vector<AggregateRow> AggregateRunCsvs(const std::vector<std::vector<RunCsvRow>> &runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  const std::size_t ticks = runs.front().size();
  for (const auto &r : runs)
    if (r.size() != ticks) throw std::invalid_argument("aggregate: runs have different tick counts");
  std::vector<AggregateRow> out(ticks);
  const double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < ticks; ++i) {
    double mean = 0.0;
    for (const auto &r : runs) mean += r[i].theta_deg;
    mean /= n;
    double var = 0.0;
    for (const auto &r : runs) var += (r[i].theta_deg - mean) * (r[i].theta_deg - mean);
    out[i] = {runs.front()[i].time_s, mean, std::sqrt(var / n)};
  }
  return out;
}

void WriteFileAtomic(const std::string &path, const std::string &contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error(tmp + ": cannot open for writing");
    os << contents;
    if (!os) throw std::runtime_error(tmp + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace doacorr
