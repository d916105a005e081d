#include "affect/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"

namespace affect::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

std::string fourcc(std::span<const std::uint8_t> b) {
  return {reinterpret_cast<const char*>(b.data()), 4};
}

FmtChunk parse_fmt(std::span<const std::uint8_t> body) {
  io::ByteReader r(body, "wav fmt chunk");
  FmtChunk f;
  f.format = r.u16();
  f.channels = r.u16();
  f.sample_rate = r.u32();
  r.u32();  // byte rate
  f.block_align = r.u16();
  f.bits = r.u16();
  if (f.format == kFormatExtensible) {
    if (r.remaining() < 24) throw FormatError("wav: truncated WAVE_FORMAT_EXTENSIBLE header");
    r.u16();  // cbSize
    r.u16();  // valid bits
    r.u32();  // channel mask
    f.format = r.u16();  // first two bytes of the subformat GUID
  }
  return f;
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "wav");
  if (bytes.size() < 12) throw FormatError("wav: shorter than a RIFF header");
  if (fourcc(r.take(4)) != "RIFF") throw FormatError("wav: missing RIFF tag");
  r.u32();  // riff size, not trusted
  if (fourcc(r.take(4)) != "WAVE") throw FormatError("wav: missing WAVE tag");

  std::optional<FmtChunk> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  while (r.remaining() >= 8) {
    const std::string id = fourcc(r.take(4));
    const std::uint32_t size = r.u32();
    if (size > r.remaining()) {
      // Some writers leave the data size unset while streaming; accept a
      // short final data chunk, reject anything else.
      if (id != "data") throw FormatError("wav: chunk '" + id + "' overruns file");
      data = r.take(r.remaining());
      break;
    }
    auto body = r.take(size);
    if (size % 2 == 1 && r.remaining() > 0) r.take(1);
    if (id == "fmt ") {
      fmt = parse_fmt(body);
    } else if (id == "data") {
      data = body;
    }
  }
  if (!fmt) throw FormatError("wav: no fmt chunk");
  if (!data) throw FormatError("wav: no data chunk");
  if (fmt->sample_rate == 0) throw FormatError("wav: sample rate is zero");
  if (fmt->channels != 1 && fmt->channels != 2) {
    throw UnsupportedCodecError("wav: " + std::to_string(fmt->channels) +
                                " channels (only mono and stereo are supported)");
  }
  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool f32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !f32) {
    throw UnsupportedCodecError("wav: format tag " + std::to_string(fmt->format) + " with " +
                                std::to_string(fmt->bits) + " bits per sample");
  }
  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  if (fmt->block_align != frame_bytes) throw FormatError("wav: inconsistent block align");

  const std::size_t n = data->size() / frame_bytes;
  if (n == 0) throw FormatError("wav: no samples");

  AudioBuffer out;
  out.sample_rate_hz = fmt->sample_rate;
  out.samples.resize(n);
  io::ByteReader dr(*data, "wav data");
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < fmt->channels; ++c) {
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(dr.u16()) / 32768.0;
      } else {
        v = dr.f32();
        if (!std::isfinite(v)) throw FormatError("wav: non-finite float sample at frame " + std::to_string(i));
        v = std::clamp(v, -1.0, 1.0);
      }
      acc += v;
    }
    out.samples[i] = fmt->channels == 2 ? acc * 0.5 : acc;
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  auto bytes = io::read_file(path);
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const UnsupportedCodecError& e) {
    throw UnsupportedCodecError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, WavEncoding enc) {
  if (buf.sample_rate_hz == 0) throw ConfigError("encode_wav: sample rate is zero");
  const std::uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(buf.samples.size() * block);

  io::ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + data_size);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u16(enc == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  w.u16(1);
  w.u32(buf.sample_rate_hz);
  w.u32(buf.sample_rate_hz * block);
  w.u16(block);
  w.u16(bits);
  w.magic("data");
  w.u32(data_size);
  for (double x : buf.samples) {
    if (enc == WavEncoding::kPcm16) {
      const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
      w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      w.f32(static_cast<float>(x));
    }
  }
  return w.take();
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf, WavEncoding enc) {
  io::write_file(path, encode_wav(buf, enc));
}

}  // namespace affect::audio
