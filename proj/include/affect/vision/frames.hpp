#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "affect/vision/types.hpp"

namespace affect::vision {

enum class SamplingMode { kTrainPositive, kTrainNeutral, kTest };

inline constexpr double kTrainPositiveFps = 3.0;
inline constexpr double kTrainNeutralFps = 1.0;
inline constexpr std::size_t kTestEveryNFrames = 5;

struct ClipDescriptor {
  std::string clip_id;
  double fps = 0.0;
  std::size_t frame_count = 0;
};

// Frame indices a sampling mode visits, strictly increasing. Training modes
// take floor(k * fps / rate) for k = 0, 1, ...; Test takes every
// `every_n`-th frame from index 0.
std::vector<std::size_t> sample_frame_indices(const ClipDescriptor& clip, SamplingMode mode,
                                              std::size_t every_n = kTestEveryNFrames);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const ClipDescriptor& descriptor() const = 0;
  virtual Image load(std::size_t frame_index) const = 0;
};

// Loads the sampled frames.
std::vector<FrameRef> sample_frames(const FrameSource& source, SamplingMode mode,
                                    std::size_t every_n = kTestEveryNFrames);

class InMemoryFrameSource final : public FrameSource {
 public:
  InMemoryFrameSource(std::string clip_id, double fps, std::vector<Image> frames);

  const ClipDescriptor& descriptor() const override { return desc_; }
  Image load(std::size_t frame_index) const override;

 private:
  ClipDescriptor desc_;
  std::vector<Image> frames_;
};

// Directory of frame_NNNNNN.pgm files plus a `frames.meta` key=value file
// holding fps and frame_count. The directory may be sparse: only frames
// that are actually requested need to exist.
class DirectoryFrameSource final : public FrameSource {
 public:
  DirectoryFrameSource(std::string clip_id, std::filesystem::path dir);

  const ClipDescriptor& descriptor() const override { return desc_; }
  Image load(std::size_t frame_index) const override;

  static std::string frame_file_name(std::size_t frame_index);
  static void write_meta(const std::filesystem::path& dir, double fps, std::size_t frame_count);

 private:
  ClipDescriptor desc_;
  std::filesystem::path dir_;
};

// Binary (P5) or ASCII (P2) graymap, maxval up to 65535, scaled to [0, 1].
Image read_pgm(const std::filesystem::path& path);
// 8-bit P5 writer; values are clamped and rounded to 1/255 steps.
void write_pgm(const std::filesystem::path& path, const Image& image);

}  // namespace affect::vision
