#include "affect/vision/types.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/error.hpp"

namespace affect::vision {

std::optional<FaceBox> clamp_box(const FaceBox& box, std::size_t image_rows, std::size_t image_cols) {
  const int x0 = std::max(box.x, 0);
  const int y0 = std::max(box.y, 0);
  const int x1 = std::min(box.x + box.w, static_cast<int>(image_cols));
  const int y1 = std::min(box.y + box.h, static_cast<int>(image_rows));
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return FaceBox{x0, y0, x1 - x0, y1 - y0, box.confidence};
}

Image crop(const Image& image, const FaceBox& box) {
  Image out(static_cast<std::size_t>(box.h), static_cast<std::size_t>(box.w));
  for (int r = 0; r < box.h; ++r) {
    for (int c = 0; c < box.w; ++c) {
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          image(static_cast<std::size_t>(box.y + r), static_cast<std::size_t>(box.x + c));
    }
  }
  return out;
}

FaceEmbedding::FaceEmbedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("face embedding is empty");
  bool nonzero = false;
  for (float v : values_) {
    if (!std::isfinite(v)) throw DataError("face embedding has a non-finite component");
    nonzero = nonzero || v != 0.0f;
  }
  if (!nonzero) throw DataError("face embedding is all zero");
}

}  // namespace affect::vision
