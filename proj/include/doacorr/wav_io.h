#ifndef DOACORR_WAV_IO_H_
#define DOACORR_WAV_IO_H_

#include <span>
#include <string>
#include <vector>

namespace doacorr {

enum class WavEncoding { kPcm16, kFloat32 };

struct WavData {
  std::vector<double> samples;  // first channel, in [-1, 1]
  int fs = 0;
};

// Reads RIFF/WAVE, 16-bit PCM or 32-bit IEEE float, little-endian. Takes the
// first channel of multichannel files. Throws std::runtime_error naming the
// byte offset of the first malformed field.
WavData LoadWav(const std::string &path);

// Mono writer. PCM16 clips to [-1, 1].
void WriteWav(const std::string &path, std::span<const double> samples, int fs,
              WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace doacorr

#endif  // DOACORR_WAV_IO_H_
