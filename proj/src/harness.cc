#include "doacorr/harness.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace doacorr {

namespace {

constexpr double kGoodRunToleranceDeg = 5.0;

std::mt19937_64 SubStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

void TrialConfig::Validate() const {
  beamformer.Validate();
  quality.Validate();
  corrector.Validate();
  if (window_len == 0 || (window_len & (window_len - 1)) != 0)
    throw std::invalid_argument("window_len must be a power of two");
  if (hop * 4 != window_len) throw std::invalid_argument("hop must be window_len / 4");
}

RunRecord RunTrial(const ScenePlan &scene, const TrialConfig &config, double theta_est,
                   std::uint64_t seed) {
  config.Validate();
  scene.Validate();
  const double min_duration = config.quality.t_w;
  if (scene.duration_s < min_duration)
    throw std::invalid_argument("scene duration " + std::to_string(scene.duration_s) +
                                " s is shorter than t_w " + std::to_string(min_duration) + " s");
  return RunTrial(scene, RenderMixture(scene), config, theta_est, seed);
}

RunRecord RunTrial(const ScenePlan &scene, const Mixture &mixture, const TrialConfig &config,
                   double theta_est, std::uint64_t seed) {
  config.Validate();
  scene.Validate();
  if (mixture.fs != scene.fs)
    throw std::invalid_argument("mixture fs " + std::to_string(mixture.fs) +
                                " does not match scene fs " + std::to_string(scene.fs));
  if (mixture.channels.size() != scene.geometry.num_mics())
    throw std::invalid_argument("mixture channel count does not match the array");
  if (!std::isfinite(theta_est)) throw std::invalid_argument("theta_est must be finite");
  const int fs = mixture.fs;
  const std::size_t n = mixture.num_samples();
  const auto window = static_cast<std::size_t>(std::llround(config.quality.t_w * fs));
  if (n < window)
    throw std::invalid_argument("scene of " + std::to_string(n) + " samples is shorter than t_w");
  if (n < config.window_len)
    throw std::invalid_argument("scene is shorter than one analysis window");

  const double t_h = config.quality.t_h;
  const auto ticks = static_cast<std::size_t>(std::floor(static_cast<double>(n) / (t_h * fs) + 1e-9));

  RunRecord rec;
  rec.run_id = "seed-" + std::to_string(seed);
  rec.seed = seed;
  rec.theta_est = theta_est;
  rec.true_doa = scene.sources.front().true_doa_deg;
  rec.scene_digest = scene.Digest();
  rec.config = config;
  rec.theta_series.reserve(ticks + 1);
  rec.quality_series.reserve(ticks);

  StreamingBeamformer beamformer(scene.geometry, fs, config.beamformer, n, config.window_len,
                                 config.hop);
  QualityStream quality(config.quality, fs, seed);
  std::mt19937_64 dropout_rng = SubStream(seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CorrectionLoop loop(theta_est, config.corrector, t_h);
  ThetaChannel channel(theta_est);

  std::vector<double> enhanced(n, 0.0);
  std::size_t produced = 0;
  std::size_t dropouts = 0;
  rec.theta_series.push_back({0.0, theta_est});

  for (std::size_t k = 1; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * t_h;
    const auto available = std::min(n, static_cast<std::size_t>(std::llround(t * fs)));
    beamformer.Advance(mixture.channels, available, channel.Latest().theta_deg);

    const std::size_t finalized = beamformer.finalized();
    const auto out = beamformer.output();
    const bool drop = unit(dropout_rng) < config.quality.dropout_prob;
    if (drop && finalized > produced) ++dropouts;
    for (std::size_t i = produced; i < finalized; ++i) enhanced[i] = drop ? 0.0 : out[i];
    produced = finalized;

    QualitySample sample;
    if (produced >= window) {
      const std::span<const double> w(enhanced.data() + produced - window, window);
      const std::span<const double> r(mixture.reference.data() + produced - window, window);
      sample = quality.Step(t, w, r);
    } else {
      sample.time_s = t;
      sample.smooth_q_db = quality.smoothed();
    }
    rec.quality_series.push_back(sample);

    const double theta = loop.Tick(k, quality.smoothed());
    channel.Publish(t, theta);
    rec.theta_series.push_back({t, theta});
  }

  if (loop.rejected_steps() > 0)
    rec.warnings.push_back(std::to_string(loop.rejected_steps()) +
                           " corrector steps rejected (no finite quality available)");
  if (dropouts > 0)
    rec.warnings.push_back(std::to_string(dropouts) + " output chunks zeroed by dropout");
  rec.final_third_mean_theta = FinalThirdMeanTheta(rec.theta_series);
  rec.good = ClassifyGoodRun(rec.theta_series, rec.true_doa);
  return rec;
}

double AngleDiffDeg(double a, double b) {
  double d = std::remainder(a - b, 360.0);
  if (d <= -180.0) d += 360.0;
  return d;
}

double FinalThirdMeanTheta(const std::vector<ThetaPoint> &series) {
  if (series.empty()) throw std::invalid_argument("empty theta trajectory");
  const double t0 = series.front().time_s;
  const double t1 = series.back().time_s;
  const double start = t1 - (t1 - t0) / 3.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto &p : series) {
    if (p.time_s + 1e-9 >= start) {
      sum += p.theta_deg;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

bool ClassifyGoodRun(const std::vector<ThetaPoint> &series, double true_doa) {
  return std::abs(AngleDiffDeg(FinalThirdMeanTheta(series), true_doa)) < kGoodRunToleranceDeg;
}

bool ClassifyGoodRun(const RunRecord &record, double true_doa) {
  return ClassifyGoodRun(record.theta_series, true_doa);
}

double ConvergenceTime(const std::vector<ThetaPoint> &series, double true_doa, double span_s,
                       double tolerance_deg) {
  if (series.empty()) throw std::invalid_argument("empty theta trajectory");
  const double t0 = series.front().time_s;
  std::size_t lo = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i].theta_deg;
    while (series[lo].time_s < series[i].time_s - span_s + 1e-9) sum -= series[lo++].theta_deg;
    if (series[i].time_s - t0 + 1e-9 < span_s) continue;
    const double mean = sum / static_cast<double>(i - lo + 1);
    if (std::abs(AngleDiffDeg(mean, true_doa)) < tolerance_deg) return series[i].time_s;
  }
  return -1.0;
}

double MeanOracleSiSdr(const ScenePlan &scene, const Mixture &mixture, const TrialConfig &config,
                       double doa_deg) {
  config.Validate();
  const auto out = BeamformStream(
      mixture.channels, [doa_deg](std::size_t, double) { return doa_deg; }, scene.geometry,
      mixture.fs, config.beamformer, config.window_len, config.hop);
  const auto window = static_cast<std::size_t>(std::llround(config.quality.t_w * mixture.fs));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + window <= out.size(); start += window) {
    const std::span<const double> w(out.data() + start, window);
    const std::span<const double> r(mixture.reference.data() + start, window);
    const VadCount vad = VadActivity(w, config.quality.t_vad, mixture.fs,
                                     config.quality.vad_energy_threshold_db);
    if (!Gate(vad.n_act, vad.n_total)) continue;
    if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) continue;
    sum += SiSdr(w, r);
    ++count;
  }
  if (count == 0) throw std::runtime_error("no active windows to score");
  return sum / static_cast<double>(count);
}

TrajectoryStats Aggregate(const std::vector<RunRecord> &records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  const auto &grid = records.front().theta_series;
  for (const auto &r : records) {
    if (r.theta_series.size() != grid.size())
      throw std::invalid_argument("aggregate: run " + r.run_id + " has a different tick count");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(r.theta_series[i].time_s - grid[i].time_s) > 1e-9)
        throw std::invalid_argument("aggregate: run " + r.run_id + " has a different time grid");
  }
  TrajectoryStats stats;
  stats.n_runs = records.size();
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double mean = 0.0;
    for (const auto &r : records) mean += r.theta_series[i].theta_deg;
    mean /= n;
    double var = 0.0;
    for (const auto &r : records) {
      const double d = r.theta_series[i].theta_deg - mean;
      var += d * d;
    }
    stats.time_s.push_back(grid[i].time_s);
    stats.mean_theta.push_back(mean);
    stats.std_theta.push_back(std::sqrt(var / n));
  }
  for (const auto &r : records)
    if (ClassifyGoodRun(r, r.true_doa)) ++stats.good_run_count;
  return stats;
}

}  // namespace doacorr
