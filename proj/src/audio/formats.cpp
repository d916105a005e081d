#include "affect/audio/formats.hpp"

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"

namespace affect::audio {

namespace {
constexpr const char* kMelMagic = "AFMEL1";
constexpr const char* kNormMagic = "AFNRM1";
}  // namespace

std::vector<std::uint8_t> encode_spectrogram(const Matrix& m) {
  io::ByteWriter w;
  w.magic(kMelMagic);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) w.f32(static_cast<float>(v));
  return w.take();
}

Matrix decode_spectrogram(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "AFMEL1");
  r.expect_magic(kMelMagic);
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (r.remaining() != rows * cols * 4) {
    throw FormatError("AFMEL1: payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                      std::to_string(rows * cols * 4));
  }
  std::vector<double> values(rows * cols);
  for (double& v : values) v = r.f32();
  return Matrix(rows, cols, std::move(values));
}

void save_spectrogram(const std::filesystem::path& path, const Matrix& m) {
  io::write_file(path, encode_spectrogram(m));
}

Matrix load_spectrogram(const std::filesystem::path& path) {
  return decode_spectrogram(io::read_file(path));
}

std::vector<std::uint8_t> encode_norm_stats(const NormStats& s) {
  io::ByteWriter w;
  w.magic(kNormMagic);
  w.f64(s.mean);
  w.f64(s.std);
  return w.take();
}

NormStats decode_norm_stats(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "AFNRM1");
  r.expect_magic(kNormMagic);
  NormStats s;
  s.mean = r.f64();
  s.std = r.f64();
  r.expect_end();
  if (!(s.std > 0.0)) throw FormatError("AFNRM1: std must be positive");
  return s;
}

void save_norm_stats(const std::filesystem::path& path, const NormStats& s) {
  io::write_file(path, encode_norm_stats(s));
}

NormStats load_norm_stats(const std::filesystem::path& path) {
  return decode_norm_stats(io::read_file(path));
}

}  // namespace affect::audio
