#include "doacorr/quality.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doacorr {

std::string ToString(EstimatorKind kind) {
  return kind == EstimatorKind::kOracle ? "oracle" : "noisy-oracle";
}

EstimatorKind ParseEstimatorKind(const std::string &name) {
  if (name == "oracle") return EstimatorKind::kOracle;
  if (name == "noisy-oracle") return EstimatorKind::kNoisyOracle;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected oracle or noisy-oracle)");
}

void QualityConfig::Validate() const {
  if (!(t_h > 0.0)) throw std::invalid_argument("t_h must be positive");
  if (!(t_vad > 0.0)) throw std::invalid_argument("t_vad must be positive");
  if (!(t_vad < t_w)) throw std::invalid_argument("t_vad must be shorter than t_w");
  if (!(t_h <= t_w)) throw std::invalid_argument("t_h must not exceed t_w");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(noise_sigma_db >= 0.0)) throw std::invalid_argument("noise_sigma_db must be >= 0");
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0))
    throw std::invalid_argument("dropout_prob must lie in [0, 1]");
  if (!std::isfinite(vad_energy_threshold_db))
    throw std::invalid_argument("vad_energy_threshold_db must be finite");
}

VadCount VadActivity(std::span<const double> window, double t_vad, int fs,
                     double threshold_db) {
  const auto sub = static_cast<std::size_t>(std::llround(t_vad * fs));
  if (sub == 0) throw std::invalid_argument("VadActivity: t_vad shorter than one sample");
  VadCount count;
  count.n_total = window.size() / sub;
  // Compare mean power against the threshold power to avoid a log per window.
  const double threshold_power = std::pow(10.0, threshold_db / 10.0);
  for (std::size_t i = 0; i < count.n_total; ++i) {
    double energy = 0.0;
    for (std::size_t n = i * sub; n < (i + 1) * sub; ++n) energy += window[n] * window[n];
    if (energy / static_cast<double>(sub) > threshold_power) ++count.n_act;
  }
  return count;
}

bool Gate(std::size_t n_act, std::size_t n_total) { return 4 * n_act > 3 * n_total; }

double SiSdr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size())
    throw std::invalid_argument("SiSdr: length mismatch");
  if (estimate.empty()) throw std::invalid_argument("SiSdr: empty input");
  double ref_energy = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    cross += estimate[i] * reference[i];
  }
  if (ref_energy == 0.0) throw std::invalid_argument("SiSdr: all-zero reference");
  const double scale = cross / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = scale * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    residual += e * e;
  }
  // A silent or orthogonal estimate scores the floor, even with no residual.
  if (target == 0.0) return kSiSdrMinDb;
  if (residual == 0.0) return kSiSdrMaxDb;
  return std::clamp(10.0 * std::log10(target / residual), kSiSdrMinDb, kSiSdrMaxDb);
}

double EmulateNoise(double q_db, double sigma_db, std::mt19937_64 &rng) {
  if (sigma_db == 0.0) return q_db;
  std::normal_distribution<double> noise(0.0, sigma_db);
  return q_db + noise(rng);
}

double Smooth(double prev_q, double raw_q, double alpha) {
  return alpha * prev_q + (1.0 - alpha) * raw_q;
}

QualityStream::QualityStream(QualityConfig config, int fs, std::uint64_t seed)
    : config_(config), fs_(fs), rng_(seed) {
  config_.Validate();
  if (fs <= 0) throw std::invalid_argument("QualityStream: fs must be positive");
}

std::size_t QualityStream::window_samples() const {
  return static_cast<std::size_t>(std::llround(config_.t_w * fs_));
}

QualitySample QualityStream::Step(double time_s, std::span<const double> window,
                                  std::span<const double> reference) {
  if (window.size() != reference.size())
    throw std::invalid_argument("QualityStream: window/reference length mismatch");
  QualitySample sample;
  sample.time_s = time_s;
  const VadCount vad =
      VadActivity(window, config_.t_vad, fs_, config_.vad_energy_threshold_db);
  sample.n_act = vad.n_act;
  sample.n_total = vad.n_total;
  sample.vad_active = Gate(vad.n_act, vad.n_total) &&
                      std::any_of(reference.begin(), reference.end(),
                                  [](double v) { return v != 0.0; });
  if (sample.vad_active) {
    double raw;
    try {
      raw = SiSdr(window, reference);
    } catch (const std::exception &e) {
      throw std::runtime_error("quality step at t=" + std::to_string(time_s) + ": " + e.what());
    }
    if (config_.estimator == EstimatorKind::kNoisyOracle)
      raw = EmulateNoise(raw, config_.noise_sigma_db, rng_);
    smooth_ = smooth_ ? Smooth(*smooth_, raw, config_.alpha) : raw;
    sample.raw_q_db = raw;
  }
  sample.smooth_q_db = smooth_;
  return sample;
}

}  // namespace doacorr
