// Closed-loop trials on simulated time.
//
// Each tick of t_h seconds the beamformer consumes the newly available
// mixture steered by the latest published theta, the quality stream scores
// the trailing t_w of beamformed output against the time-aligned reference,
// and (after warm-up) the corrector publishes a new theta.

#ifndef DOACORR_HARNESS_H_
#define DOACORR_HARNESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "doacorr/array_scene.h"
#include "doacorr/beamform.h"
#include "doacorr/corrector.h"
#include "doacorr/quality.h"

namespace doacorr {

struct TrialConfig {
  BeamformerConfig beamformer;
  QualityConfig quality;
  CorrectorConfig corrector;
  std::size_t window_len = 1024;
  std::size_t hop = 256;

  void Validate() const;
};

struct RunRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  double theta_est = 0.0;
  double true_doa = 0.0;
  std::string scene_digest;
  TrialConfig config;
  std::vector<ThetaPoint> theta_series;     // one per tick, starting at t = 0
  std::vector<QualitySample> quality_series;  // one per tick, starting at t = t_h
  bool good = false;
  double final_third_mean_theta = 0.0;
  std::vector<std::string> warnings;
};

// Renders the plan and runs one trial.
RunRecord RunTrial(const ScenePlan &scene, const TrialConfig &config, double theta_est,
                   std::uint64_t seed);
// Same, on a pre-rendered mixture of `scene`.
RunRecord RunTrial(const ScenePlan &scene, const Mixture &mixture, const TrialConfig &config,
                   double theta_est, std::uint64_t seed);

// Signed angular difference wrapped to (-180, 180].
double AngleDiffDeg(double a, double b);

// Mean theta over the final third of the run's duration.
double FinalThirdMeanTheta(const std::vector<ThetaPoint> &series);
// |mean over final third - true_doa| < 5 degrees. Throws on an empty series.
bool ClassifyGoodRun(const std::vector<ThetaPoint> &series, double true_doa);
bool ClassifyGoodRun(const RunRecord &record, double true_doa);

// First time at which the trailing `span_s` mean of theta lies within
// `tolerance_deg` of true_doa; negative if never.
double ConvergenceTime(const std::vector<ThetaPoint> &series, double true_doa,
                       double span_s = 5.0, double tolerance_deg = 5.0);

// Mean oracle SI-SDR of the output steered at a fixed `doa_deg`, over
// consecutive non-overlapping t_w windows whose VAD gate is open.
double MeanOracleSiSdr(const ScenePlan &scene, const Mixture &mixture, const TrialConfig &config,
                       double doa_deg);

struct TrajectoryStats {
  std::vector<double> time_s;
  std::vector<double> mean_theta;
  std::vector<double> std_theta;  // population
  std::size_t n_runs = 0;
  std::size_t good_run_count = 0;
};

// Per-tick mean and population std. Throws when grids differ.
TrajectoryStats Aggregate(const std::vector<RunRecord> &records);

}  // namespace doacorr

#endif  // DOACORR_HARNESS_H_
