// On-disk formats for run records, aggregates and experiment manifests.
//
//   run-<k>.csv     time_s,theta_deg,raw_q_db,smooth_q_db,vad_active
//   run-<k>.json    config snapshot and run summary
//   aggregate.csv   time_s,mean_theta,std_theta
//   manifest.json   index of every file an experiment wrote

#ifndef DOACORR_PERSISTENCE_H_
#define DOACORR_PERSISTENCE_H_

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doacorr/harness.h"

namespace doacorr {

inline constexpr const char *kRunCsvHeader = "time_s,theta_deg,raw_q_db,smooth_q_db,vad_active";
inline constexpr const char *kAggregateCsvHeader = "time_s,mean_theta,std_theta";

nlohmann::ordered_json ToJson(const TrialConfig &config);
nlohmann::ordered_json RunSummaryJson(const RunRecord &record);

std::string RunCsv(const RunRecord &record);
std::string AggregateCsv(const TrajectoryStats &stats);

struct RunCsvRow {
  double time_s = 0.0;
  double theta_deg = 0.0;
  std::optional<double> raw_q_db;
  std::optional<double> smooth_q_db;
  bool vad_active = false;
};

struct AggregateRow {
  double time_s = 0.0;
  double mean_theta = 0.0;
  double std_theta = 0.0;
};

// Both readers throw std::runtime_error naming the file and line.
std::vector<RunCsvRow> ReadRunCsv(const std::string &path);
std::vector<AggregateRow> ReadAggregateCsv(const std::string &path);

// Per-tick mean/std over run CSVs, as Aggregate() does for records.
std::vector<AggregateRow> AggregateRunCsvs(const std::vector<std::vector<RunCsvRow>> &runs);

// Writes via a temporary file and rename so readers never see partial files.
void WriteFileAtomic(const std::string &path, const std::string &contents);
std::string ReadFile(const std::string &path);

}  // namespace doacorr

#endif  // DOACORR_PERSISTENCE_H_
