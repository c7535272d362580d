// Hann-windowed STFT analysis and weighted overlap-add synthesis.

#ifndef DOACORR_SPECTRAL_H_
#define DOACORR_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace doacorr {

using Complex = std::complex<double>;

// Real-to-half-complex FFT of a fixed size, backed by FFTW. Unnormalized in
// both directions. Not copyable; one instance per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // in.size() == size(), out.size() == bins().
  void Forward(std::span<const double> in, std::span<Complex> out);
  // in.size() == bins(), out.size() == size(). Result is scaled by size().
  void Inverse(std::span<const Complex> in, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> HannWindow(std::size_t n);

class TimeFrequencyGrid {
 public:
  TimeFrequencyGrid(std::size_t frames, std::size_t window_len, std::size_t hop,
                    int fs);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t window_len() const { return window_len_; }
  std::size_t hop() const { return hop_; }
  int fs() const { return fs_; }

  Complex &at(std::size_t frame, std::size_t bin) { return data_[frame * bins_ + bin]; }
  const Complex &at(std::size_t frame, std::size_t bin) const {
    return data_[frame * bins_ + bin];
  }
  std::span<Complex> frame(std::size_t t) { return {data_.data() + t * bins_, bins_}; }
  std::span<const Complex> frame(std::size_t t) const {
    return {data_.data() + t * bins_, bins_};
  }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

 private:
  std::size_t frames_;
  std::size_t bins_;
  std::size_t window_len_;
  std::size_t hop_;
  int fs_;
  std::vector<Complex> data_;
};

// Number of full frames that fit in n samples.
std::size_t NumFrames(std::size_t num_samples, std::size_t window_len, std::size_t hop);

// window_len must be a power of two and hop == window_len / 4.
TimeFrequencyGrid Stft(std::span<const double> signal, std::size_t window_len,
                       std::size_t hop, int fs);

// Least-squares overlap-add inverse. Output length is
// (frames - 1) * hop + window_len.
std::vector<double> Istft(const TimeFrequencyGrid &grid);

// Incremental weighted overlap-add synthesizer shared by Istft and the
// streaming beamformer. Samples before (t + 1) * hop are final once frame t
// has been added.
class OverlapAdd {
 public:
  OverlapAdd(std::size_t window_len, std::size_t hop, std::size_t total_frames);

  void AddFrame(std::size_t t, std::span<const Complex> spectrum);
  std::size_t output_length() const { return out_.size(); }
  // Number of leading samples that no later frame can change.
  std::size_t finalized() const { return finalized_; }
  // Normalized output; only the first finalized() samples are meaningful.
  std::span<const double> output() const { return out_; }

 private:
  std::size_t window_len_;
  std::size_t hop_;
  std::size_t total_frames_;
  std::size_t finalized_ = 0;
  std::vector<double> window_;
  std::vector<double> acc_;
  std::vector<double> norm_;
  std::vector<double> out_;
  std::vector<double> scratch_;
  RealFft fft_;
};

}  // namespace doacorr

#endif  // DOACORR_SPECTRAL_H_
