// Phase-based frequency-masking beamformer.
//
// A time-frequency bin of the reference channel is kept when the observed
// phase difference between the reference and every other channel agrees with
// the plane-wave model for the steering direction; otherwise it is scaled by
// the mask floor.

#ifndef DOACORR_BEAMFORM_H_
#define DOACORR_BEAMFORM_H_

#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "doacorr/array_scene.h"
#include "doacorr/spectral.h"

namespace doacorr {

enum class AliasingPolicy { kWrappedCompare, kLowpassOnly };

std::string ToString(AliasingPolicy policy);
AliasingPolicy ParseAliasingPolicy(const std::string &name);

struct BeamformerConfig {
  double phase_tolerance_rad = 0.35 * std::numbers::pi;
  double mask_floor = 0.05;
  std::size_t reference_channel = 0;
  AliasingPolicy aliasing_policy = AliasingPolicy::kWrappedCompare;

  void Validate() const;
};

// Wraps to (-pi, pi].
double WrapPhase(double phase);

// wrap(2 pi f (delay_j - delay_i)) for mic_pair = (i, j).
double ExpectedPhaseDiff(const ArrayGeometry &geometry, double doa_deg, double freq_hz,
                         std::pair<std::size_t, std::size_t> mic_pair);

// Frequency above which inter-mic phase wraps: c / (2 * max pairwise distance).
double AliasingFrequency(const ArrayGeometry &geometry);

// One STFT frame per channel, all with the same bin count.
using MultiFrame = std::vector<std::vector<Complex>>;

// Precomputed per-bin steering rotations for one DOA.
class SteeringTable {
 public:
  SteeringTable(const ArrayGeometry &geometry, double doa_deg, int fs,
                std::size_t window_len, std::size_t reference_channel);
  double doa_deg() const { return doa_deg_; }
  // exp(-i * expected phase diff) for (reference, other) at `bin`.
  const Complex &rotation(std::size_t other, std::size_t bin) const {
    return rotations_[other * bins_ + bin];
  }

 private:
  double doa_deg_;
  std::size_t bins_;
  std::vector<Complex> rotations_;
};

// Per-bin gains (1 or mask_floor) for one multichannel frame.
std::vector<double> ComputeMask(const MultiFrame &frame, const ArrayGeometry &geometry,
                                double doa_deg, int fs, std::size_t window_len,
                                const BeamformerConfig &config);

// Reference channel times the mask.
std::vector<Complex> BeamformFrame(const MultiFrame &frame, const ArrayGeometry &geometry,
                                   double doa_deg, int fs, std::size_t window_len,
                                   const BeamformerConfig &config);

// Returns the steering DOA for the frame starting at `frame_index`.
using DoaProvider = std::function<double(std::size_t frame_index, double time_s)>;

// Frame-by-frame beamformer over a fixed-length multichannel input. Frames
// are processed as input samples become available; output samples become
// final one hop after the frame that last touches them.
class StreamingBeamformer {
 public:
  StreamingBeamformer(const ArrayGeometry &geometry, int fs, BeamformerConfig config,
                      std::size_t num_samples, std::size_t window_len = 1024,
                      std::size_t hop = 256);

  // Processes every frame lying inside input[0, available) using
  // `doa_deg`. Returns the number of frames processed.
  std::size_t Advance(const std::vector<std::vector<double>> &input, std::size_t available,
                      double doa_deg);
  // Same, asking `provider` for each frame's DOA.
  std::size_t Advance(const std::vector<std::vector<double>> &input, std::size_t available,
                      const DoaProvider &provider);

  std::size_t frames_done() const { return next_frame_; }
  std::size_t total_frames() const { return total_frames_; }
  std::size_t finalized() const;
  // Output buffer of the input's length; only [0, finalized()) is final.
  std::span<const double> output() const { return output_; }

 private:
  void ProcessFrame(const std::vector<std::vector<double>> &input, double doa_deg);

  ArrayGeometry geometry_;
  int fs_;
  BeamformerConfig config_;
  std::size_t num_samples_;
  std::size_t window_len_;
  std::size_t hop_;
  std::size_t total_frames_;
  std::size_t next_frame_ = 0;
  std::vector<double> window_;
  std::vector<double> segment_;
  MultiFrame frame_;
  std::vector<double> mask_;
  std::vector<Complex> masked_;
  RealFft fft_;
  OverlapAdd ola_;
  std::vector<double> output_;
  std::vector<SteeringTable> cache_;
};

// Whole-signal convenience wrapper around StreamingBeamformer.
std::vector<double> BeamformStream(const std::vector<std::vector<double>> &input,
                                   const DoaProvider &provider, const ArrayGeometry &geometry,
                                   int fs, const BeamformerConfig &config,
                                   std::size_t window_len = 1024, std::size_t hop = 256);

}  // namespace doacorr

#endif  // DOACORR_BEAMFORM_H_
