#include "affect/vision/detector.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/resize.hpp"
#include "affect/vision/synthetic_face.hpp"

namespace affect::vision {

std::vector<FaceBox> detect_faces(const FrameRef& frame, const FaceDetector& detector) {
  std::vector<FaceBox> raw;
  try {
    raw = detector.detect(frame.image);
  } catch (const std::exception& e) {
    throw DetectorError(frame.clip_id, frame.frame_index, e.what());
  }
  std::vector<FaceBox> boxes;
  boxes.reserve(raw.size());
  for (const auto& b : raw) {
    if (!std::isfinite(b.confidence)) {
      throw DetectorError(frame.clip_id, frame.frame_index, "non-finite confidence");
    }
    if (auto c = clamp_box(b, frame.image.rows(), frame.image.cols())) {
      c->confidence = std::clamp(c->confidence, 0.0, 1.0);
      boxes.push_back(*c);
    }
  }
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const FaceBox& a, const FaceBox& b) { return a.confidence > b.confidence; });
  return boxes;
}

std::vector<FaceBox> SyntheticMarkerDetector::detect(const Image& image) const {
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  std::vector<std::uint8_t> seen(rows * cols, 0);
  auto lit = [&](std::size_t r, std::size_t c) { return image(r, c) >= kMarkerLevel; };

  std::vector<FaceBox> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (seen[start] || !lit(start / cols, start % cols)) continue;
    std::size_t r0 = rows, r1 = 0, c0 = cols, c1 = 0;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / cols, c = p % cols;
      r0 = std::min(r0, r), r1 = std::max(r1, r);
      c0 = std::min(c0, c), c1 = std::max(c1, c);
      auto visit = [&](std::size_t rr, std::size_t cc) {
        const std::size_t q = rr * cols + cc;
        if (!seen[q] && lit(rr, cc)) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (r > 0) visit(r - 1, c);
      if (r + 1 < rows) visit(r + 1, c);
      if (c > 0) visit(r, c - 1);
      if (c + 1 < cols) visit(r, c + 1);
    }
    const int h = static_cast<int>(r1 - r0 + 1);
    const int w = static_cast<int>(c1 - c0 + 1);
    if (h < min_side_ || w < min_side_) continue;

    std::size_t border = 0, border_lit = 0;
    for (std::size_t c = c0; c <= c1; ++c) {
      border += 2;
      border_lit += lit(r0, c) + lit(r1, c);
    }
    for (std::size_t r = r0 + 1; r < r1; ++r) {
      border += 2;
      border_lit += lit(r, c0) + lit(r, c1);
    }
    out.push_back({static_cast<int>(c0), static_cast<int>(r0), w, h,
                   static_cast<double>(border_lit) / static_cast<double>(border)});
  }
  return out;
}

FaceEmbedding SyntheticCodeEmbedder::embed(const Image& face) const {
  namespace syn = affect::vision::synthetic;
  if (face.empty()) throw DataError("cannot embed an empty face crop");
  const Image tile = resize_bilinear(face, syn::kFaceSize, syn::kFaceSize);
  std::vector<float> v;
  v.reserve(kEmbeddingDim);
  const std::size_t repeat = kEmbeddingDim / syn::kCodeCount;
  double max_dev = 0.0;
  for (int i = 0; i < syn::kCodeCount; ++i) {
    const int r0 = syn::kGridRow + (i / syn::kGridCells) * syn::kCellSize;
    const int c0 = syn::kGridCol + (i % syn::kGridCells) * syn::kCellSize;
    double sum = 0.0;
    for (int r = r0; r < r0 + syn::kCellSize; ++r) {
      for (int c = c0; c < c0 + syn::kCellSize; ++c) sum += tile(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
    const double dev = sum / (syn::kCellSize * syn::kCellSize) - syn::kSkinLevel;
    max_dev = std::max(max_dev, std::abs(dev));
    for (std::size_t k = 0; k < repeat; ++k) v.push_back(static_cast<float>(dev));
  }
  if (max_dev < 1e-6) {
    std::fill(v.begin(), v.end(), 0.0f);
    v[0] = 1.0f;
  }
  return FaceEmbedding(std::move(v));
}

DetectorFactory synthetic_detector_factory() {
  return [] { return std::make_unique<SyntheticMarkerDetector>(); };
}

EmbedderFactory synthetic_embedder_factory() {
  return [] { return std::make_unique<SyntheticCodeEmbedder>(); };
}

}  // namespace affect::vision
