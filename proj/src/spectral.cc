#include "doacorr/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace doacorr {

namespace {

// FFTW planning is not thread-safe.
std::mutex &PlannerMutex() {
  static std::mutex m;
  return m;
}

bool IsPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void CheckStftShape(std::size_t window_len, std::size_t hop) {
  if (!IsPowerOfTwo(window_len) || window_len < 4)
    throw std::invalid_argument("stft: window_len must be a power of two >= 4, got " +
                                std::to_string(window_len));
  if (hop * 4 != window_len)
    throw std::invalid_argument("stft: hop must be window_len / 4, got " +
                                std::to_string(hop));
}

}  // namespace

struct RealFft::Impl {
  double *real = nullptr;
  fftw_complex *spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw std::invalid_argument("RealFft: size must be positive");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  impl_->real = fftw_alloc_real(n);
  impl_->spec = fftw_alloc_complex(n / 2 + 1);
  const int size = static_cast<int>(n);
  impl_->forward = fftw_plan_dft_r2c_1d(size, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(size, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->inverse);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != n_ || out.size() != bins())
    throw std::invalid_argument("RealFft::Forward: size mismatch");
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->forward);
  for (std::size_t k = 0; k < bins(); ++k)
    out[k] = Complex(impl_->spec[k][0], impl_->spec[k][1]);
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_)
    throw std::invalid_argument("RealFft::Inverse: size mismatch");
  for (std::size_t k = 0; k < bins(); ++k) {
    impl_->spec[k][0] = in[k].real();
    impl_->spec[k][1] = in[k].imag();
  }
  // c2r transforms overwrite their input.
  fftw_execute(impl_->inverse);
  std::copy(impl_->real, impl_->real + n_, out.begin());
}

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

TimeFrequencyGrid::TimeFrequencyGrid(std::size_t frames, std::size_t window_len,
                                     std::size_t hop, int fs)
    : frames_(frames), bins_(window_len / 2 + 1), window_len_(window_len), hop_(hop),
      fs_(fs) {
  if (frames == 0) throw std::invalid_argument("TimeFrequencyGrid: frames must be >= 1");
  if (hop == 0 || window_len % hop != 0)
    throw std::invalid_argument("TimeFrequencyGrid: hop must divide window_len");
  data_.assign(frames_ * bins_, Complex(0.0, 0.0));
}

std::size_t NumFrames(std::size_t num_samples, std::size_t window_len, std::size_t hop) {
  if (num_samples < window_len) return 0;
  return (num_samples - window_len) / hop + 1;
}

TimeFrequencyGrid Stft(std::span<const double> signal, std::size_t window_len,
                       std::size_t hop, int fs) {
  CheckStftShape(window_len, hop);
  if (signal.size() < window_len)
    throw std::invalid_argument("stft: signal of " + std::to_string(signal.size()) +
                                " samples is shorter than window_len " +
                                std::to_string(window_len));
  const std::size_t frames = NumFrames(signal.size(), window_len, hop);
  TimeFrequencyGrid grid(frames, window_len, hop, fs);
  const std::vector<double> window = HannWindow(window_len);
  RealFft fft(window_len);
  std::vector<double> segment(window_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double *src = signal.data() + t * hop;
    for (std::size_t i = 0; i < window_len; ++i) segment[i] = src[i] * window[i];
    fft.Forward(segment, grid.frame(t));
  }
  return grid;
}

std::vector<double> Istft(const TimeFrequencyGrid &grid) {
  if (grid.bins() != grid.window_len() / 2 + 1)
    throw std::invalid_argument("istft: bins inconsistent with window_len");
  CheckStftShape(grid.window_len(), grid.hop());
  OverlapAdd ola(grid.window_len(), grid.hop(), grid.frames());
  for (std::size_t t = 0; t < grid.frames(); ++t) ola.AddFrame(t, grid.frame(t));
  auto out = ola.output();
  return {out.begin(), out.end()};
}

OverlapAdd::OverlapAdd(std::size_t window_len, std::size_t hop, std::size_t total_frames)
    : window_len_(window_len), hop_(hop), total_frames_(total_frames),
      window_(HannWindow(window_len)), fft_(window_len) {
  if (total_frames == 0) throw std::invalid_argument("OverlapAdd: no frames");
  const std::size_t len = (total_frames - 1) * hop + window_len;
  acc_.assign(len, 0.0);
  norm_.assign(len, 0.0);
  out_.assign(len, 0.0);
  scratch_.assign(window_len, 0.0);
  for (std::size_t t = 0; t < total_frames; ++t)
    for (std::size_t i = 0; i < window_len; ++i)
      norm_[t * hop + i] += window_[i] * window_[i];
}

void OverlapAdd::AddFrame(std::size_t t, std::span<const Complex> spectrum) {
  if (t >= total_frames_) throw std::out_of_range("OverlapAdd: frame index past end");
  if (spectrum.size() != window_len_ / 2 + 1)
    throw std::invalid_argument("OverlapAdd: spectrum has wrong bin count");
  const std::size_t expected = finalized_ / hop_;
  if (t != expected)
    throw std::logic_error("OverlapAdd: frames must be added in order");
  fft_.Inverse(spectrum, scratch_);
  const double scale = 1.0 / static_cast<double>(window_len_);
  const std::size_t start = t * hop_;
  for (std::size_t i = 0; i < window_len_; ++i)
    acc_[start + i] += scratch_[i] * scale * window_[i];

  const std::size_t end = (t + 1 == total_frames_) ? out_.size() : (t + 1) * hop_;
  constexpr double kTiny = 1e-10;
  for (std::size_t n = finalized_; n < end; ++n)
    out_[n] = norm_[n] > kTiny ? acc_[n] / norm_[n] : 0.0;
  finalized_ = end;
}

}  // namespace doacorr
