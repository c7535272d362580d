// Online speech quality stream: every t_h seconds the latest t_w window of
// enhanced output is checked by an energy VAD, scored, and exponentially
// smoothed.

#ifndef DOACORR_QUALITY_H_
#define DOACORR_QUALITY_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>

namespace doacorr {

enum class EstimatorKind { kOracle, kNoisyOracle };

std::string ToString(EstimatorKind kind);
EstimatorKind ParseEstimatorKind(const std::string &name);

struct QualityConfig {
  double t_h = 0.1;
  double t_w = 3.0;
  double t_vad = 0.032;
  // Weight of the previous smoothed value; higher is smoother.
  double alpha = 0.9;
  double vad_energy_threshold_db = -45.0;
  EstimatorKind estimator = EstimatorKind::kNoisyOracle;
  double noise_sigma_db = 2.5;
  // Per-tick probability that a freshly produced output chunk is zeroed.
  double dropout_prob = 0.0;

  void Validate() const;
};

struct QualitySample {
  double time_s = 0.0;
  std::optional<double> raw_q_db;     // absent when gated
  std::optional<double> smooth_q_db;  // absent until the first ungated step
  bool vad_active = false;
  std::size_t n_act = 0;
  std::size_t n_total = 0;
};

struct VadCount {
  std::size_t n_act = 0;
  std::size_t n_total = 0;
};

// Splits the window into floor(len / (t_vad * fs)) sub-windows and counts
// those whose RMS exceeds threshold_db (dBFS, full scale = 1.0).
VadCount VadActivity(std::span<const double> window, double t_vad, int fs,
                     double threshold_db);

// n_act > 3/4 n_total, strict.
bool Gate(std::size_t n_act, std::size_t n_total);

inline constexpr double kSiSdrMinDb = -40.0;
inline constexpr double kSiSdrMaxDb = 60.0;

// Scale-invariant SDR in dB, clamped to [kSiSdrMinDb, kSiSdrMaxDb]. Throws
// std::invalid_argument on length mismatch, empty input or an all-zero
// reference.
double SiSdr(std::span<const double> estimate, std::span<const double> reference);

// q_db + N(0, sigma^2).
double EmulateNoise(double q_db, double sigma_db, std::mt19937_64 &rng);

// alpha * prev_q + (1 - alpha) * raw_q.
double Smooth(double prev_q, double raw_q, double alpha);

// Per-run state of the quality stream. The first ungated estimate seeds the
// smoother directly.
class QualityStream {
 public:
  QualityStream(QualityConfig config, int fs, std::uint64_t seed);

  // One step at `time_s`. `window` is the latest t_w of enhanced output and
  // `reference` the time-aligned clean SOI. A reference with no energy is
  // treated as a closed gate.
  QualitySample Step(double time_s, std::span<const double> window,
                     std::span<const double> reference);

  const QualityConfig &config() const { return config_; }
  std::optional<double> smoothed() const { return smooth_; }
  std::size_t window_samples() const;

 private:
  QualityConfig config_;
  int fs_;
  std::mt19937_64 rng_;
  std::optional<double> smooth_;
};

}  // namespace doacorr

#endif  // DOACORR_QUALITY_H_
