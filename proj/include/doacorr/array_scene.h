// Array geometry and far-field scene rendering.
//
// Angles are degrees, counterclockwise from the +x axis of the array plane.
// A source at angle theta sits in direction u(theta) = (cos theta, sin theta)
// from the array centroid.

#ifndef DOACORR_ARRAY_SCENE_H_
#define DOACORR_ARRAY_SCENE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace doacorr {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

class ArrayGeometry {
 public:
  // Throws std::invalid_argument for fewer than two mics, non-finite
  // coordinates, a non-positive speed of sound, or a reference point that
  // is not the centroid of the mics.
  ArrayGeometry(std::vector<Point2> mic_positions, double speed_of_sound,
                Point2 reference_point);
  // Reference point taken as the centroid.
  explicit ArrayGeometry(std::vector<Point2> mic_positions,
                         double speed_of_sound = 343.0);

  const std::vector<Point2> &mic_positions() const { return mics_; }
  std::size_t num_mics() const { return mics_.size(); }
  double speed_of_sound() const { return speed_of_sound_; }
  Point2 reference_point() const { return reference_; }
  double MaxPairwiseDistance() const;

 private:
  std::vector<Point2> mics_;
  double speed_of_sound_;
  Point2 reference_;
};

// Equilateral triangle, 0.18 m sides, mics at 90/210/330 degrees about the
// origin.
ArrayGeometry DefaultTriangularGeometry();

// Per-mic plane-wave arrival delay in seconds relative to the reference
// point: delay_i = -(p_i - ref) . u(doa) / c. Negative means the wavefront
// reaches mic i first.
std::vector<double> SteeringDelays(const ArrayGeometry &geometry, double doa_deg);

struct SourceSpec {
  std::vector<double> signal;
  double true_doa_deg = 0.0;
  double gain = 1.0;
  int fs = 16000;
};

struct ScenePlan {
  ArrayGeometry geometry = DefaultTriangularGeometry();
  // sources[0] is the source of interest.
  std::vector<SourceSpec> sources;
  int fs = 16000;
  // White noise level relative to SOI power; nullopt = off.
  std::optional<double> diffuse_noise_db;
  double duration_s = 90.0;
  std::uint64_t seed = 0;

  std::size_t num_samples() const;
  // Throws std::invalid_argument on any violated invariant.
  void Validate() const;
  // Stable hex digest over every field, including source samples.
  std::string Digest() const;
};

struct Mixture {
  int fs = 16000;
  std::vector<std::vector<double>> channels;  // num_mics x num_samples
  std::vector<double> reference;              // SOI at the centroid
  std::size_t num_samples() const { return reference.size(); }
};

// Shifts `signal` later by `delay_samples` (may be fractional or negative)
// with a 64-tap Hann-windowed sinc. Output has the input's length; samples
// outside the input are taken as zero.
std::vector<double> FractionalDelay(std::span<const double> signal,
                                    double delay_samples);

// Renders the plan. Deterministic in plan.seed.
Mixture RenderMixture(const ScenePlan &plan);

// Amplitude-modulated 300-3400 Hz noise in bursts of 0.5-2.0 s separated by
// 0.2-0.8 s silences, peak-normalized to 0.5.
std::vector<double> SynthSpeechLike(double duration_s, int fs, std::uint64_t seed);

// Fits `signal` to exactly n samples: truncates, or repeats it cyclically.
std::vector<double> FitLength(std::span<const double> signal, std::size_t n);

}  // namespace doacorr

#endif  // DOACORR_ARRAY_SCENE_H_
