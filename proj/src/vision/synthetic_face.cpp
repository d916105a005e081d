#include "affect/vision/synthetic_face.hpp"

#include <bit>

#include "affect/core/error.hpp"

namespace affect::vision::synthetic {

std::vector<int> hadamard_code(int code) {
  if (code < 0 || code >= kCodeCount) throw ConfigError("identity code out of range: " + std::to_string(code));
  std::vector<int> signs(kCodeCount);
  for (int i = 0; i < kCodeCount; ++i) {
    signs[static_cast<std::size_t>(i)] = std::popcount(static_cast<unsigned>(code & i)) % 2 == 0 ? 1 : -1;
  }
  return signs;
}

FaceEmbedding code_embedding(int code) {
  const auto signs = hadamard_code(code);
  std::vector<float> v;
  v.reserve(kEmbeddingDim);
  const std::size_t repeat = kEmbeddingDim / signs.size();
  for (int s : signs) {
    const double level = s > 0 ? kCellHigh : kCellLow;
    for (std::size_t k = 0; k < repeat; ++k) v.push_back(static_cast<float>(level - 0.5));
  }
  return FaceEmbedding(std::move(v));
}

namespace {

void fill(Image& image, int row, int col, int rows, int cols, double value) {
  for (int r = row; r < row + rows; ++r) {
    for (int c = col; c < col + cols; ++c) {
      if (r < 0 || c < 0 || r >= static_cast<int>(image.rows()) || c >= static_cast<int>(image.cols())) continue;
      image(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = value;
    }
  }
}

}  // namespace

void draw_face(Image& image, int row, int col, int code, double smile) {
  const auto signs = hadamard_code(code);
  fill(image, row, col, kFaceSize, kFaceSize, kRingLevel);
  fill(image, row + kRingWidth, col + kRingWidth, kFaceSize - 2 * kRingWidth, kFaceSize - 2 * kRingWidth,
       kSkinLevel);
  for (int i = 0; i < kCodeCount; ++i) {
    const int gr = i / kGridCells;
    const int gc = i % kGridCells;
    fill(image, row + kGridRow + gr * kCellSize, col + kGridCol + gc * kCellSize, kCellSize, kCellSize,
         signs[static_cast<std::size_t>(i)] > 0 ? kCellHigh : kCellLow);
  }
  const double mouth = kMouthNeutral + (kMouthPositive - kMouthNeutral) * smile;
  fill(image, row + kMouthRow, col + kMouthCol, kMouthRows, kMouthCols, mouth);
}

void draw_marker(Image& image, int row, int col, int side) { fill(image, row, col, side, side, kRingLevel); }

}  // namespace affect::vision::synthetic
