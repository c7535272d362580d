#include "doacorr/corrector.h"

#include <cmath>
#include <stdexcept>

namespace doacorr {

void CorrectorConfig::Validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be > 0");
  if (!(beta_m >= 0.0 && beta_m < 1.0)) throw std::invalid_argument("beta_m must lie in [0, 1)");
  if (!(beta_v >= 0.0 && beta_v < 1.0)) throw std::invalid_argument("beta_v must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(warmup_s >= 0.0)) throw std::invalid_argument("warmup_s must be >= 0");
  if (!std::isfinite(q_ceiling)) throw std::invalid_argument("q_ceiling must be finite");
}

CorrectorState CorrectorInit(double theta_est, const CorrectorConfig &config) {
  config.Validate();
  if (!std::isfinite(theta_est)) throw std::invalid_argument("theta_est must be finite");
  CorrectorState s;
  s.theta_c = theta_est;
  // theta_p = 0 keeps the first finite difference well scaled.
  s.theta_p = 0.0;
  return s;
}

StepOutcome CorrectorStep(const CorrectorState &state, double q_in,
                          const CorrectorConfig &config) {
  if (!std::isfinite(q_in)) return {state, false};
  CorrectorState s = state;
  s.q_p = s.q_c;
  s.q_c = config.q_ceiling - q_in;
  const double grad = (s.q_c - s.q_p) / (s.theta_c - s.theta_p + config.epsilon);
  s.grad_m = config.beta_m * s.grad_m + (1.0 - config.beta_m) * grad;
  s.grad_v = config.beta_v * s.grad_v + (1.0 - config.beta_v) * grad * grad;
  s.theta_p = s.theta_c;
  const auto t = static_cast<double>(s.step + 1);
  if (config.bias_correction) {
    const double m_hat = s.grad_m / (1.0 - std::pow(config.beta_m, t));
    const double v_hat = s.grad_v / (1.0 - std::pow(config.beta_v, t));
    s.theta_c -= config.eta * m_hat / (std::sqrt(v_hat) + config.epsilon);
  } else {
    s.theta_c -= config.eta * s.grad_m / (std::sqrt(s.grad_v) + config.epsilon);
  }
  ++s.step;
  if (!std::isfinite(s.theta_c)) return {state, false};
  return {s, true};
}

CorrectionLoop::CorrectionLoop(double theta_est, CorrectorConfig config, double t_h)
    : config_(config), state_(CorrectorInit(theta_est, config)),
      warmup_ticks_(static_cast<std::size_t>(std::llround(config.warmup_s / t_h))) {
  if (!(t_h > 0.0)) throw std::invalid_argument("t_h must be positive");
}

double CorrectionLoop::Tick(std::size_t tick, std::optional<double> q_smoothed) {
  if (tick < warmup_ticks_) return state_.theta_c;
  if (!q_smoothed) {
    ++rejected_;
    return state_.theta_c;
  }
  StepOutcome out = CorrectorStep(state_, *q_smoothed, config_);
  if (!out.accepted) ++rejected_;
  state_ = out.state;
  return state_.theta_c;
}

std::vector<ThetaPoint> RunCorrectionLoop(const QualitySource &quality, double theta_est,
                                          const CorrectorConfig &config, const SimClock &clock,
                                          ThetaChannel *sink) {
  CorrectionLoop loop(theta_est, config, clock.t_h);
  std::vector<ThetaPoint> out;
  out.reserve(clock.ticks + 1);
  out.push_back({0.0, theta_est});
  if (sink) sink->Publish(0.0, theta_est);
  for (std::size_t k = 1; k <= clock.ticks; ++k) {
    const double t = static_cast<double>(k) * clock.t_h;
    const double theta = loop.Tick(k, quality(t));
    out.push_back({t, theta});
    if (sink) sink->Publish(t, theta);
  }
  return out;
}

}  // namespace doacorr
