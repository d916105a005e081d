#include "affect/vision/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/core/keyvalue.hpp"

namespace affect::vision {

std::vector<std::size_t> sample_frame_indices(const ClipDescriptor& clip, SamplingMode mode,
                                              std::size_t every_n) {
  std::vector<std::size_t> out;
  if (clip.frame_count == 0) return out;
  if (mode == SamplingMode::kTest) {
    if (every_n == 0) throw ConfigError("test frame stride must be positive");
    for (std::size_t i = 0; i < clip.frame_count; i += every_n) out.push_back(i);
    return out;
  }
  if (!(clip.fps > 0.0)) throw ConfigError("clip " + clip.clip_id + ": frame rate must be positive");
  const double rate = mode == SamplingMode::kTrainPositive ? kTrainPositiveFps : kTrainNeutralFps;
  const double step = clip.fps / rate;
  for (std::size_t k = 0;; ++k) {
    // The epsilon keeps exact multiples (e.g. 10 * 30/3) from rounding down.
    const auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) * step + 1e-9));
    if (idx >= clip.frame_count) break;
    if (out.empty() || idx > out.back()) out.push_back(idx);
  }
  return out;
}

std::vector<FrameRef> sample_frames(const FrameSource& source, SamplingMode mode, std::size_t every_n) {
  const auto& desc = source.descriptor();
  std::vector<FrameRef> out;
  for (std::size_t idx : sample_frame_indices(desc, mode, every_n)) {
    out.push_back({desc.clip_id, idx, source.load(idx)});
  }
  return out;
}

InMemoryFrameSource::InMemoryFrameSource(std::string clip_id, double fps, std::vector<Image> frames)
    : desc_{std::move(clip_id), fps, frames.size()}, frames_(std::move(frames)) {}

Image InMemoryFrameSource::load(std::size_t frame_index) const {
  if (frame_index >= frames_.size()) {
    throw DataError("clip " + desc_.clip_id + ": frame " + std::to_string(frame_index) + " out of range");
  }
  return frames_[frame_index];
}

DirectoryFrameSource::DirectoryFrameSource(std::string clip_id, std::filesystem::path dir)
    : dir_(std::move(dir)) {
  const auto meta_path = dir_ / "frames.meta";
  if (!std::filesystem::exists(meta_path)) throw DataError("missing " + meta_path.string());
  const auto kv = read_key_values(meta_path);
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(meta_path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  desc_.clip_id = std::move(clip_id);
  desc_.fps = parse_double("fps", get("fps"));
  const auto count = parse_int("frame_count", get("frame_count"));
  if (count < 0) throw DataError(meta_path.string() + ": negative frame_count");
  desc_.frame_count = static_cast<std::size_t>(count);
}

std::string DirectoryFrameSource::frame_file_name(std::size_t frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.pgm", frame_index);
  return buf;
}

void DirectoryFrameSource::write_meta(const std::filesystem::path& dir, double fps, std::size_t frame_count) {
  std::ostringstream s;
  s << "fps=" << fps << "\nframe_count=" << frame_count << "\n";
  io::write_text(dir / "frames.meta", s.str());
}

Image DirectoryFrameSource::load(std::size_t frame_index) const {
  if (frame_index >= desc_.frame_count) {
    throw DataError("clip " + desc_.clip_id + ": frame " + std::to_string(frame_index) + " out of range");
  }
  const auto path = dir_ / frame_file_name(frame_index);
  if (!std::filesystem::exists(path)) {
    throw DataError("clip " + desc_.clip_id + ": missing frame file " + path.string());
  }
  return read_pgm(path);
}

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string next_token(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  if (tok.empty()) throw FormatError("pgm: truncated header");
  return tok;
}

std::size_t header_number(std::span<const std::uint8_t> b, std::size_t& pos) {
  const auto tok = next_token(b, pos);
  const auto v = parse_int("pgm header", tok);
  if (v <= 0) throw FormatError("pgm: non-positive header value");
  return static_cast<std::size_t>(v);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  std::span<const std::uint8_t> b(bytes);
  std::size_t pos = 0;
  try {
    const auto magic = next_token(b, pos);
    if (magic != "P5" && magic != "P2") throw FormatError("pgm: unsupported magic " + magic);
    const std::size_t cols = header_number(b, pos);
    const std::size_t rows = header_number(b, pos);
    const std::size_t maxval = header_number(b, pos);
    if (maxval > 65535) throw FormatError("pgm: maxval above 65535");
    Image img(rows, cols);
    if (magic == "P5") {
      ++pos;  // single whitespace after maxval
      const std::size_t bps = maxval < 256 ? 1 : 2;
      if (b.size() < pos + rows * cols * bps) throw FormatError("pgm: truncated pixel data");
      for (std::size_t i = 0; i < rows * cols; ++i) {
        const std::size_t v = bps == 1 ? b[pos + i] : (std::size_t{b[pos + 2 * i]} << 8) | b[pos + 2 * i + 1];
        img.values()[i] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
      }
    } else {
      for (std::size_t i = 0; i < rows * cols; ++i) {
        const auto v = static_cast<double>(parse_int("pgm pixel", next_token(b, pos)));
        img.values()[i] = std::clamp(v / static_cast<double>(maxval), 0.0, 1.0);
      }
    }
    return img;
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::string header = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + image.size());
  for (double v : image.values()) {
    bytes.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  io::write_file(path, bytes);
}

}  // namespace affect::vision
