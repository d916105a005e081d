#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/core/matrix.hpp"

namespace affect::vision {

// Grayscale intensities in [0, 1].
using Image = Matrix;

inline constexpr std::size_t kEmbeddingDim = 128;

struct FrameRef {
  std::string clip_id;
  std::size_t frame_index = 0;
  Image image;
};

// Pixel box; x/y are the column/row of the top-left corner.
struct FaceBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double confidence = 0.0;

  bool operator==(const FaceBox&) const = default;
};

// Intersects a box with the image; nullopt when nothing is left.
std::optional<FaceBox> clamp_box(const FaceBox& box, std::size_t image_rows, std::size_t image_cols);

// Copies the pixels under an already clamped box.
Image crop(const Image& image, const FaceBox& box);

// Finite, not-all-zero embedding vector.
class FaceEmbedding {
 public:
  FaceEmbedding() = default;
  // Throws DataError for non-finite or all-zero input.
  explicit FaceEmbedding(std::vector<float> values);

  std::span<const float> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }

  bool operator==(const FaceEmbedding&) const = default;

 private:
  std::vector<float> values_;
};

}  // namespace affect::vision
