#include "doacorr/beamform.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doacorr {

namespace {

double BinFrequency(std::size_t bin, int fs, std::size_t window_len) {
  return static_cast<double>(bin) * fs / static_cast<double>(window_len);
}

void CheckFrame(const MultiFrame &frame, const ArrayGeometry &geometry,
                std::size_t window_len, const BeamformerConfig &config) {
  if (frame.size() != geometry.num_mics())
    throw std::invalid_argument("beamform: frame has " + std::to_string(frame.size()) +
                                " channels, geometry has " +
                                std::to_string(geometry.num_mics()));
  const std::size_t bins = window_len / 2 + 1;
  for (const auto &ch : frame)
    if (ch.size() != bins)
      throw std::invalid_argument("beamform: channel bin count mismatch");
  if (config.reference_channel >= frame.size())
    throw std::invalid_argument("beamform: reference channel out of range");
}

void MaskFromTable(const MultiFrame &frame, const SteeringTable &table, int fs,
                   std::size_t window_len, double alias_hz, const BeamformerConfig &config,
                   std::vector<double> &mask) {
  const std::size_t bins = window_len / 2 + 1;
  const std::size_t ref = config.reference_channel;
  const double cos_tol = std::cos(config.phase_tolerance_rad);
  const bool lowpass_only = config.aliasing_policy == AliasingPolicy::kLowpassOnly;
  mask.assign(bins, 1.0);
  for (std::size_t k = 0; k < bins; ++k) {
    if (lowpass_only && BinFrequency(k, fs, window_len) > alias_hz) continue;
    bool pass = true;
    for (std::size_t j = 0; j < frame.size() && pass; ++j) {
      if (j == ref) continue;
      // |arg z| <= tol  <=>  Re z >= |z| cos(tol), for tol in (0, pi).
      const Complex z = frame[ref][k] * std::conj(frame[j][k]) * table.rotation(j, k);
      pass = z.real() >= std::abs(z) * cos_tol;
    }
    if (!pass) mask[k] = config.mask_floor;
  }
}

}  // namespace

std::string ToString(AliasingPolicy policy) {
  return policy == AliasingPolicy::kLowpassOnly ? "lowpass-only" : "wrapped-compare";
}

AliasingPolicy ParseAliasingPolicy(const std::string &name) {
  if (name == "wrapped-compare") return AliasingPolicy::kWrappedCompare;
  if (name == "lowpass-only") return AliasingPolicy::kLowpassOnly;
  throw std::invalid_argument("unknown aliasing policy '" + name +
                              "' (expected wrapped-compare or lowpass-only)");
}

void BeamformerConfig::Validate() const {
  if (!(phase_tolerance_rad > 0.0 && phase_tolerance_rad < std::numbers::pi))
    throw std::invalid_argument("phase_tolerance_rad must lie in (0, pi)");
  if (!(mask_floor >= 0.0 && mask_floor <= 1.0))
    throw std::invalid_argument("mask_floor must lie in [0, 1]");
}

double WrapPhase(double phase) {
  double w = std::remainder(phase, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

double ExpectedPhaseDiff(const ArrayGeometry &geometry, double doa_deg, double freq_hz,
                         std::pair<std::size_t, std::size_t> mic_pair) {
  const auto delays = SteeringDelays(geometry, doa_deg);
  const double dd = delays.at(mic_pair.second) - delays.at(mic_pair.first);
  return WrapPhase(2.0 * std::numbers::pi * freq_hz * dd);
}

double AliasingFrequency(const ArrayGeometry &geometry) {
  return geometry.speed_of_sound() / (2.0 * geometry.MaxPairwiseDistance());
}

SteeringTable::SteeringTable(const ArrayGeometry &geometry, double doa_deg, int fs,
                             std::size_t window_len, std::size_t reference_channel)
    : doa_deg_(doa_deg), bins_(window_len / 2 + 1) {
  const auto delays = SteeringDelays(geometry, doa_deg);
  const std::size_t mics = geometry.num_mics();
  rotations_.assign(mics * bins_, Complex(1.0, 0.0));
  for (std::size_t j = 0; j < mics; ++j) {
    const double dd = delays[j] - delays[reference_channel];
    for (std::size_t k = 0; k < bins_; ++k) {
      const double phase = 2.0 * std::numbers::pi * BinFrequency(k, fs, window_len) * dd;
      rotations_[j * bins_ + k] = std::polar(1.0, -phase);
    }
  }
}

std::vector<double> ComputeMask(const MultiFrame &frame, const ArrayGeometry &geometry,
                                double doa_deg, int fs, std::size_t window_len,
                                const BeamformerConfig &config) {
  config.Validate();
  CheckFrame(frame, geometry, window_len, config);
  if (!std::isfinite(doa_deg)) throw std::invalid_argument("beamform: non-finite DOA");
  SteeringTable table(geometry, doa_deg, fs, window_len, config.reference_channel);
  std::vector<double> mask;
  MaskFromTable(frame, table, fs, window_len, AliasingFrequency(geometry), config, mask);
  return mask;
}

std::vector<Complex> BeamformFrame(const MultiFrame &frame, const ArrayGeometry &geometry,
                                   double doa_deg, int fs, std::size_t window_len,
                                   const BeamformerConfig &config) {
  const std::vector<double> mask = ComputeMask(frame, geometry, doa_deg, fs, window_len, config);
  std::vector<Complex> out(mask.size());
  const auto &ref = frame[config.reference_channel];
  for (std::size_t k = 0; k < mask.size(); ++k) out[k] = ref[k] * mask[k];
  return out;
}

StreamingBeamformer::StreamingBeamformer(const ArrayGeometry &geometry, int fs,
                                         BeamformerConfig config, std::size_t num_samples,
                                         std::size_t window_len, std::size_t hop)
    : geometry_(geometry), fs_(fs), config_(config), num_samples_(num_samples),
      window_len_(window_len), hop_(hop),
      total_frames_(NumFrames(num_samples, window_len, hop)), window_(HannWindow(window_len)),
      segment_(window_len), frame_(geometry.num_mics(), std::vector<Complex>(window_len / 2 + 1)),
      fft_(window_len), ola_(window_len, hop, std::max<std::size_t>(total_frames_, 1)),
      output_(num_samples, 0.0) {
  config_.Validate();
  if (config_.reference_channel >= geometry.num_mics())
    throw std::invalid_argument("beamform: reference channel out of range");
  if (total_frames_ == 0)
    throw std::invalid_argument("beamform: input shorter than one window");
}

std::size_t StreamingBeamformer::finalized() const {
  if (next_frame_ == total_frames_) return num_samples_;
  return ola_.finalized();
}

void StreamingBeamformer::ProcessFrame(const std::vector<std::vector<double>> &input,
                                       double doa_deg) {
  if (!std::isfinite(doa_deg)) throw std::invalid_argument("beamform: non-finite DOA");
  const std::size_t start = next_frame_ * hop_;
  for (std::size_t m = 0; m < input.size(); ++m) {
    const double *src = input[m].data() + start;
    for (std::size_t i = 0; i < window_len_; ++i) segment_[i] = src[i] * window_[i];
    fft_.Forward(segment_, frame_[m]);
  }
  if (cache_.empty() || cache_.front().doa_deg() != doa_deg) {
    cache_.clear();
    cache_.emplace_back(geometry_, doa_deg, fs_, window_len_, config_.reference_channel);
  }
  MaskFromTable(frame_, cache_.front(), fs_, window_len_, AliasingFrequency(geometry_), config_,
                mask_);
  masked_.resize(mask_.size());
  const auto &ref = frame_[config_.reference_channel];
  for (std::size_t k = 0; k < mask_.size(); ++k) masked_[k] = ref[k] * mask_[k];

  const std::size_t before = ola_.finalized();
  ola_.AddFrame(next_frame_, masked_);
  const auto out = ola_.output();
  std::copy(out.begin() + before, out.begin() + ola_.finalized(), output_.begin() + before);
  ++next_frame_;
}

std::size_t StreamingBeamformer::Advance(const std::vector<std::vector<double>> &input,
                                         std::size_t available, double doa_deg) {
  return Advance(input, available, [doa_deg](std::size_t, double) { return doa_deg; });
}

std::size_t StreamingBeamformer::Advance(const std::vector<std::vector<double>> &input,
                                         std::size_t available, const DoaProvider &provider) {
  if (input.size() != geometry_.num_mics())
    throw std::invalid_argument("beamform: input channel count mismatch");
  for (const auto &ch : input)
    if (ch.size() != num_samples_)
      throw std::invalid_argument("beamform: input length mismatch");
  available = std::min(available, num_samples_);
  std::size_t processed = 0;
  while (next_frame_ < total_frames_ && next_frame_ * hop_ + window_len_ <= available) {
    const double t = static_cast<double>(next_frame_ * hop_) / fs_;
    ProcessFrame(input, provider(next_frame_, t));
    ++processed;
  }
  return processed;
}

std::vector<double> BeamformStream(const std::vector<std::vector<double>> &input,
                                   const DoaProvider &provider, const ArrayGeometry &geometry,
                                   int fs, const BeamformerConfig &config,
                                   std::size_t window_len, std::size_t hop) {
  if (input.empty()) throw std::invalid_argument("beamform: no channels");
  StreamingBeamformer bf(geometry, fs, config, input.front().size(), window_len, hop);
  bf.Advance(input, input.front().size(), provider);
  auto out = bf.output();
  return {out.begin(), out.end()};
}

}  // namespace doacorr
