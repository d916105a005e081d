#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "affect/core/error.hpp"
#include "affect/vision/types.hpp"

namespace affect::vision {

// Raised by detect_faces when the underlying detector fails.
class DetectorError : public Error {
 public:
  DetectorError(const std::string& clip_id, std::size_t frame_index, const std::string& what)
      : Error("face detector failed on " + clip_id + " frame " + std::to_string(frame_index) + ": " + what),
        frame_index_(frame_index) {}

  std::size_t frame_index() const { return frame_index_; }

 private:
  std::size_t frame_index_;
};

class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual std::vector<FaceBox> detect(const Image& image) const = 0;
};

class FaceEmbedder {
 public:
  virtual ~FaceEmbedder() = default;
  virtual FaceEmbedding embed(const Image& face) const = 0;
};

using DetectorFactory = std::function<std::unique_ptr<FaceDetector>()>;
using EmbedderFactory = std::function<std::unique_ptr<FaceEmbedder>()>;

// Runs the detector, clamps its boxes to the frame, drops empty ones and
// sorts by descending confidence (stable for equal confidence).
std::vector<FaceBox> detect_faces(const FrameRef& frame, const FaceDetector& detector);

// Finds planted synthetic faces: connected regions of near-white pixels
// (>= kMarkerLevel) whose bounding box is at least min_side on both axes.
// Confidence is the fraction of the box border that is lit, so a planted
// ring or filled square scores 1.
class SyntheticMarkerDetector final : public FaceDetector {
 public:
  static constexpr double kMarkerLevel = 0.99;

  explicit SyntheticMarkerDetector(int min_side = 8) : min_side_(min_side) {}
  std::vector<FaceBox> detect(const Image& image) const override;

 private:
  int min_side_;
};

// Reads the 4x4 identity grid of a synthetic face. The crop is resized to
// 32x32, each grid cell's mean minus 0.5 is repeated 8 times to fill 128
// dimensions. A crop with no contrast in the grid maps to the unit vector
// e0 so that the result is always a valid embedding.
class SyntheticCodeEmbedder final : public FaceEmbedder {
 public:
  FaceEmbedding embed(const Image& face) const override;
};

DetectorFactory synthetic_detector_factory();
EmbedderFactory synthetic_embedder_factory();

}  // namespace affect::vision
