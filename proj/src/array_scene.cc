#include "doacorr/array_scene.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "doacorr/spectral.h"

namespace doacorr {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kCentroidTolerance = 1e-9;
constexpr int kDelayHalfTaps = 32;  // 64 taps total

Point2 Centroid(const std::vector<Point2> &points) {
  Point2 c;
  for (const auto &p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  if (!points.empty()) {
    c.x /= static_cast<double>(points.size());
    c.y /= static_cast<double>(points.size());
  }
  return c;
}

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// 64-bit FNV-1a.
class Fnv1a {
 public:
  void Add(const void *data, std::size_t n) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void AddValue(const T &v) {
    Add(&v, sizeof(T));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

ArrayGeometry::ArrayGeometry(std::vector<Point2> mic_positions, double speed_of_sound,
                             Point2 reference_point)
    : mics_(std::move(mic_positions)), speed_of_sound_(speed_of_sound),
      reference_(reference_point) {
  if (mics_.size() < 2)
    throw std::invalid_argument("ArrayGeometry: need at least 2 microphones");
  for (const auto &p : mics_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("ArrayGeometry: non-finite mic position");
  if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_))
    throw std::invalid_argument("ArrayGeometry: speed of sound must be positive");
  const Point2 c = Centroid(mics_);
  if (std::abs(c.x - reference_.x) > kCentroidTolerance ||
      std::abs(c.y - reference_.y) > kCentroidTolerance)
    throw std::invalid_argument("ArrayGeometry: reference point is not the mic centroid");
}

ArrayGeometry::ArrayGeometry(std::vector<Point2> mic_positions, double speed_of_sound)
    : ArrayGeometry(mic_positions, speed_of_sound, Centroid(mic_positions)) {}

double ArrayGeometry::MaxPairwiseDistance() const {
  double best = 0.0;
  for (std::size_t i = 0; i < mics_.size(); ++i)
    for (std::size_t j = i + 1; j < mics_.size(); ++j)
      best = std::max(best, std::hypot(mics_[i].x - mics_[j].x, mics_[i].y - mics_[j].y));
  return best;
}

ArrayGeometry DefaultTriangularGeometry() {
  constexpr double kSide = 0.18;
  const double radius = kSide / std::sqrt(3.0);
  std::vector<Point2> mics;
  for (double angle : {90.0, 210.0, 330.0})
    mics.push_back({radius * std::cos(angle * kDegToRad), radius * std::sin(angle * kDegToRad)});
  // Cancel the rounding residue so the centroid is exactly the origin.
  const Point2 c = Centroid(mics);
  for (auto &p : mics) {
    p.x -= c.x;
    p.y -= c.y;
  }
  return ArrayGeometry(std::move(mics), 343.0, Point2{0.0, 0.0});
}

std::vector<double> SteeringDelays(const ArrayGeometry &geometry, double doa_deg) {
  const double ux = std::cos(doa_deg * kDegToRad);
  const double uy = std::sin(doa_deg * kDegToRad);
  const Point2 ref = geometry.reference_point();
  std::vector<double> delays;
  delays.reserve(geometry.num_mics());
  for (const auto &p : geometry.mic_positions())
    delays.push_back(-((p.x - ref.x) * ux + (p.y - ref.y) * uy) / geometry.speed_of_sound());
  return delays;
}

std::size_t ScenePlan::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * fs));
}

void ScenePlan::Validate() const {
  if (fs <= 0) throw std::invalid_argument("ScenePlan: fs must be positive");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw std::invalid_argument("ScenePlan: duration_s must be positive");
  if (sources.empty())
    throw std::invalid_argument("ScenePlan: need at least one source (the SOI)");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto &s = sources[i];
    const std::string tag = "ScenePlan: source " + std::to_string(i) + ": ";
    if (s.signal.empty()) throw std::invalid_argument(tag + "empty signal");
    if (s.fs != fs)
      throw std::invalid_argument(tag + "fs " + std::to_string(s.fs) +
                                  " does not match scene fs " + std::to_string(fs));
    if (!(s.gain >= 0.0) || !std::isfinite(s.gain))
      throw std::invalid_argument(tag + "gain must be non-negative");
    if (!(s.true_doa_deg >= -180.0 && s.true_doa_deg < 360.0))
      throw std::invalid_argument(tag + "true_doa_deg must lie in [-180, 360)");
  }
  if (diffuse_noise_db && !std::isfinite(*diffuse_noise_db))
    throw std::invalid_argument("ScenePlan: diffuse_noise_db must be finite");
}

std::string ScenePlan::Digest() const {
  Fnv1a h;
  h.AddValue(fs);
  h.AddValue(duration_s);
  h.AddValue(seed);
  h.AddValue(diffuse_noise_db.has_value());
  if (diffuse_noise_db) h.AddValue(*diffuse_noise_db);
  h.AddValue(geometry.speed_of_sound());
  for (const auto &p : geometry.mic_positions()) {
    h.AddValue(p.x);
    h.AddValue(p.y);
  }
  for (const auto &s : sources) {
    h.AddValue(s.true_doa_deg);
    h.AddValue(s.gain);
    h.AddValue(s.fs);
    h.Add(s.signal.data(), s.signal.size() * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

std::vector<double> FractionalDelay(std::span<const double> signal, double delay_samples) {
  const double whole = std::floor(delay_samples);
  const double frac = delay_samples - whole;
  const long shift = static_cast<long>(whole);

  // y[n] = sum_m h[m] x[n - shift - m], h[m] = sinc(m - frac) * hann(m - frac).
  std::vector<double> taps;
  std::vector<long> offsets;
  for (int m = -kDelayHalfTaps + 1; m <= kDelayHalfTaps; ++m) {
    const double u = m - frac;
    if (std::abs(u) >= kDelayHalfTaps) continue;
    const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * u / kDelayHalfTaps));
    const double h = Sinc(u) * w;
    if (h == 0.0) continue;
    taps.push_back(h);
    offsets.push_back(shift + m);
  }

  const long n_samples = static_cast<long>(signal.size());
  std::vector<double> out(signal.size(), 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const long off = offsets[k];
    const double h = taps[k];
    const long begin = std::max<long>(0, off);
    const long end = std::min<long>(n_samples, n_samples + off);
    for (long n = begin; n < end; ++n) out[n] += h * signal[n - off];
  }
  return out;
}

std::vector<double> FitLength(std::span<const double> signal, std::size_t n) {
  if (signal.empty()) throw std::invalid_argument("FitLength: empty signal");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = signal[i % signal.size()];
  return out;
}

Mixture RenderMixture(const ScenePlan &plan) {
  plan.Validate();
  const std::size_t n = plan.num_samples();
  const std::size_t num_mics = plan.geometry.num_mics();

  Mixture mix;
  mix.fs = plan.fs;
  mix.channels.assign(num_mics, std::vector<double>(n, 0.0));
  mix.reference.assign(n, 0.0);

  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    const SourceSpec &src = plan.sources[s];
    std::vector<double> scaled = FitLength(src.signal, n);
    for (double &v : scaled) v *= src.gain;
    if (s == 0) mix.reference = scaled;
    const std::vector<double> delays = SteeringDelays(plan.geometry, src.true_doa_deg);
    for (std::size_t m = 0; m < num_mics; ++m) {
      const std::vector<double> delayed = FractionalDelay(scaled, delays[m] * plan.fs);
      auto &ch = mix.channels[m];
      for (std::size_t i = 0; i < n; ++i) ch[i] += delayed[i];
    }
  }

  if (plan.diffuse_noise_db) {
    double soi_power = 0.0;
    for (double v : mix.reference) soi_power += v * v;
    soi_power /= static_cast<double>(n);
    const double sigma = std::sqrt(soi_power * std::pow(10.0, *plan.diffuse_noise_db / 10.0));
    std::mt19937_64 rng(plan.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto &ch : mix.channels)
      for (double &v : ch) v += sigma * noise(rng);
  }
  return mix;
}

std::vector<double> SynthSpeechLike(double duration_s, int fs, std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("SynthSpeechLike: duration_s must be > 0");
  if (fs <= 0) throw std::invalid_argument("SynthSpeechLike: fs must be positive");
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Band-limit white noise to 300-3400 Hz in the frequency domain.
  std::vector<double> carrier(n);
  for (double &v : carrier) v = gauss(rng);
  if (n >= 2) {
    RealFft fft(n);
    std::vector<Complex> spec(fft.bins());
    fft.Forward(carrier, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(n);
      if (f < 300.0 || f > 3400.0) spec[k] = 0.0;
    }
    fft.Inverse(spec, carrier);
  }

  // Syllabic envelope: bursts of syllables, silences between bursts.
  std::vector<double> env(n, 0.0);
  const double ramp = 0.01 * fs;
  std::size_t pos = static_cast<std::size_t>(uniform(0.0, 0.3) * fs);
  while (pos < n) {
    const std::size_t burst = static_cast<std::size_t>(uniform(0.5, 2.0) * fs);
    const std::size_t burst_end = std::min(n, pos + burst);
    std::size_t syl = pos;
    while (syl < burst_end) {
      const std::size_t len = std::min(burst_end - syl,
                                       static_cast<std::size_t>(uniform(0.12, 0.3) * fs));
      const double amp = uniform(0.4, 1.0);
      for (std::size_t i = 0; i < len; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(len);
        const double s = std::sin(std::numbers::pi * x);
        env[syl + i] = amp * (0.25 + 0.75 * s * s);
      }
      syl += std::max<std::size_t>(len, 1);
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(ramp) && pos + i < burst_end; ++i) {
      const double g = static_cast<double>(i) / ramp;
      env[pos + i] *= g;
      env[burst_end - 1 - i] *= g;
    }
    pos = burst_end + static_cast<std::size_t>(uniform(0.2, 0.8) * fs);
  }

  std::vector<double> out(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = carrier[i] * env[i];
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak > 0.0)
    for (double &v : out) v *= 0.5 / peak;
  return out;
}

}  // namespace doacorr
