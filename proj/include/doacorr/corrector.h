// DOA correction by Adam-style descent on a pivoted quality signal.
//
// The quality gradient is the instantaneous finite difference between the
// last two (theta, quality) pairs. By default the moment estimates are used
// without bias correction.

#ifndef DOACORR_CORRECTOR_H_
#define DOACORR_CORRECTOR_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace doacorr {

struct CorrectorConfig {
  double eta = 0.1;
  double beta_m = 0.9;
  double beta_v = 0.999;
  // Used in both the gradient and the update denominators.
  double epsilon = 1e-8;
  bool bias_correction = false;
  double warmup_s = 10.0;
  // Quality is maximized by minimizing q_ceiling - q.
  double q_ceiling = 100.0;

  void Validate() const;
};

struct CorrectorState {
  double theta_c = 0.0;
  double theta_p = 0.0;
  double q_c = 0.0;
  double q_p = 0.0;
  double grad_m = 0.0;
  double grad_v = 0.0;
  std::size_t step = 0;

  bool operator==(const CorrectorState &) const = default;
};

CorrectorState CorrectorInit(double theta_est, const CorrectorConfig &config);

struct StepOutcome {
  CorrectorState state;
  bool accepted = true;  // false: non-finite input, state unchanged
};

StepOutcome CorrectorStep(const CorrectorState &state, double q_in,
                          const CorrectorConfig &config);

struct ThetaPoint {
  double time_s = 0.0;
  double theta_deg = 0.0;
};

// Latest-value channel from the corrector to the beamformer. The reader only
// ever sees the most recent publication.
class ThetaChannel {
 public:
  explicit ThetaChannel(double initial) : latest_{0.0, initial} {}
  void Publish(double time_s, double theta_deg) { latest_ = {time_s, theta_deg}; }
  ThetaPoint Latest() const { return latest_; }

 private:
  ThetaPoint latest_;
};

// Warm-up gating around CorrectorStep on a tick clock of period t_h.
class CorrectionLoop {
 public:
  CorrectionLoop(double theta_est, CorrectorConfig config, double t_h);

  // Called once per tick (tick >= 1, at time tick * t_h) with the latest
  // smoothed quality, or nullopt if none exists yet. Returns the theta to
  // publish.
  double Tick(std::size_t tick, std::optional<double> q_smoothed);

  std::size_t warmup_ticks() const { return warmup_ticks_; }
  const CorrectorState &state() const { return state_; }
  std::size_t rejected_steps() const { return rejected_; }

 private:
  CorrectorConfig config_;
  CorrectorState state_;
  std::size_t warmup_ticks_;
  std::size_t rejected_ = 0;
};

// Quality as a function of simulated time; nullopt while none is available.
using QualitySource = std::function<std::optional<double>(double time_s)>;

struct SimClock {
  double t_h = 0.1;
  std::size_t ticks = 0;
};

// Runs the loop for clock.ticks ticks. Emission 0 is theta_est at time 0;
// emission k is published at time k * t_h. Every emission is forwarded to
// `sink` when provided.
std::vector<ThetaPoint> RunCorrectionLoop(const QualitySource &quality, double theta_est,
                                          const CorrectorConfig &config, const SimClock &clock,
                                          ThetaChannel *sink = nullptr);

}  // namespace doacorr

#endif  // DOACORR_CORRECTOR_H_
