#include "doacorr/wav_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace doacorr {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void Need(std::size_t n, const char *what) const {
    if (remaining() < n)
      Fail(std::string("truncated ") + what);
  }
  [[noreturn]] void Fail(const std::string &what) const {
    throw std::runtime_error(path_ + ": " + what + " at offset " + std::to_string(pos_));
  }

  std::string Tag(const char *what) {
    Need(4, what);
    std::string s(reinterpret_cast<const char *>(&bytes_[pos_]), 4);
    pos_ += 4;
    return s;
  }
  std::uint32_t U32(const char *what) {
    Need(4, what);
    std::uint32_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8) | (bytes_[pos_ + 2] << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  std::uint16_t U16(const char *what) {
    Need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  void Skip(std::size_t n) { pos_ += std::min(n, remaining()); }
  const unsigned char *At(std::size_t pos) const { return bytes_.data() + pos; }

 private:
  std::vector<unsigned char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

void PutU32(std::ostream &os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char *>(b), 4);
}

void PutU16(std::ostream &os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

}  // namespace

WavData LoadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes), path);

  if (r.Tag("RIFF tag") != "RIFF") r.Fail("missing RIFF tag");
  r.U32("RIFF size");
  if (r.Tag("WAVE tag") != "WAVE") r.Fail("missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t fs = 0;
  while (r.remaining() > 0) {
    const std::size_t chunk_start = r.offset();
    const std::string id = r.Tag("chunk id");
    const std::uint32_t size = r.U32("chunk size");
    if (id == "fmt ") {
      if (size < 16) r.Fail("fmt chunk too small");
      r.Need(size, "fmt chunk");
      const std::size_t body = r.offset();
      format = r.U16("audio format");
      channels = r.U16("channel count");
      fs = r.U32("sample rate");
      r.U32("byte rate");
      r.U16("block align");
      bits = r.U16("bits per sample");
      if (format == kFormatExtensible) {
        if (size < 40) r.Fail("extensible fmt chunk too small");
        r.Skip(8);  // cbSize, valid bits, channel mask
        format = r.U16("extensible subformat");
      }
      r.Skip(size - (r.offset() - body));
      if (size % 2) r.Skip(1);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) r.Fail("data chunk before fmt chunk");
      if (channels == 0) r.Fail("zero channels");
      if (fs == 0) r.Fail("zero sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32)
        throw std::runtime_error(path + ": unsupported encoding (format " +
                                 std::to_string(format) + ", " + std::to_string(bits) +
                                 " bits); expected 16-bit PCM or 32-bit float");
      const std::size_t sample_bytes = bits / 8;
      const std::size_t frame_bytes = sample_bytes * channels;
      if (size > r.remaining()) r.Fail("truncated data chunk (declared " +
                                       std::to_string(size) + " bytes)");
      const std::size_t frames = size / frame_bytes;
      WavData out;
      out.fs = static_cast<int>(fs);
      out.samples.resize(frames);
      const unsigned char *p = r.At(r.offset());
      for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char *s = p + i * frame_bytes;
        if (pcm16) {
          const auto v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
          out.samples[i] = static_cast<double>(v) / 32768.0;
        } else {
          float f;
          std::memcpy(&f, s, 4);
          out.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
        }
      }
      return out;
    } else {
      if (size > r.remaining()) {
        throw std::runtime_error(path + ": truncated chunk '" + id + "' at offset " +
                                 std::to_string(chunk_start));
      }
      r.Skip(size + (size % 2));
    }
  }
  r.Fail("no data chunk");
}

void WriteWav(const std::string &path, std::span<const double> samples, int fs,
              WavEncoding encoding) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * (bits / 8));

  os.write("RIFF", 4);
  PutU32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  PutU32(os, 16);
  PutU16(os, format);
  PutU16(os, 1);
  PutU32(os, static_cast<std::uint32_t>(fs));
  PutU32(os, static_cast<std::uint32_t>(fs) * (bits / 8));
  PutU16(os, bits / 8);
  PutU16(os, bits);
  os.write("data", 4);
  PutU32(os, data_bytes);
  for (double v : samples) {
    if (encoding == WavEncoding::kPcm16) {
      const double c = std::clamp(v, -1.0, 1.0);
      const auto q = static_cast<std::int16_t>(
          std::clamp(std::lround(c * 32768.0), -32768L, 32767L));
      PutU16(os, static_cast<std::uint16_t>(q));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      PutU32(os, u);
    }
  }
  if (!os) throw std::runtime_error(path + ": write failed");
}

}  // namespace doacorr
