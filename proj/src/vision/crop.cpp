#include "affect/vision/crop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affect/core/error.hpp"
#include "affect/core/resize.hpp"

namespace affect::vision {

namespace {

Image window(const Image& m, std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) {
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = m(row + r, col + c);
  }
  return out;
}

double sample_clamped(const Image& m, double r, double c) {
  const double maxr = static_cast<double>(m.rows() - 1);
  const double maxc = static_cast<double>(m.cols() - 1);
  r = std::clamp(r, 0.0, maxr);
  c = std::clamp(c, 0.0, maxc);
  const auto r0 = static_cast<std::size_t>(std::floor(r));
  const auto c0 = static_cast<std::size_t>(std::floor(c));
  const std::size_t r1 = std::min(r0 + 1, m.rows() - 1);
  const std::size_t c1 = std::min(c0 + 1, m.cols() - 1);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  const double top = m(r0, c0) * (1.0 - fc) + m(r0, c1) * fc;
  const double bottom = m(r1, c0) * (1.0 - fc) + m(r1, c1) * fc;
  return top * (1.0 - fr) + bottom * fr;
}

Image rotate(const Image& m, double degrees) {
  if (degrees == 0.0) return m;
  const double t = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(t), sn = std::sin(t);
  const double cr = static_cast<double>(m.rows() - 1) / 2.0;
  const double cc = static_cast<double>(m.cols() - 1) / 2.0;
  Image out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double dr = static_cast<double>(r) - cr;
      const double dc = static_cast<double>(c) - cc;
      out(r, c) = sample_clamped(m, cr + cs * dr + sn * dc, cc - sn * dr + cs * dc);
    }
  }
  return out;
}

Image shift(const Image& m, long dy, long dx) {
  if (dy == 0 && dx == 0) return m;
  const long rows = static_cast<long>(m.rows());
  const long cols = static_cast<long>(m.cols());
  Image out(m.rows(), m.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const long sr = std::clamp(r - dy, 0L, rows - 1);
      const long sc = std::clamp(c - dx, 0L, cols - 1);
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          m(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    }
  }
  return out;
}

}  // namespace

std::optional<Image> prepare_face_crop(const Image& image, const FaceBox& box, CropMode mode, Rng& rng) {
  const auto clamped = clamp_box(box, image.rows(), image.cols());
  if (!clamped) return std::nullopt;
  const Image face = crop(image, *clamped);
  if (mode == CropMode::kTest) return resize_bilinear(face, kFaceInput, kFaceInput);
  const Image big = resize_bilinear(face, kTrainResize, kTrainResize);
  const auto slack = static_cast<std::int64_t>(kTrainResize - kFaceInput);
  const auto dy = static_cast<std::size_t>(rng.between(0, slack));
  const auto dx = static_cast<std::size_t>(rng.between(0, slack));
  return window(big, dy, dx, kFaceInput, kFaceInput);
}

Image augment(const Image& face, Rng& rng, const AugmentParams& params) {
  if (face.rows() < kTrainResize || face.cols() < kTrainResize) {
    throw ShapeError("augment needs at least 48x48, got " + face.shape().to_string());
  }
  if (params.max_rotation_deg < 0.0 || params.max_shift_px < 0 ||
      !(params.illumination_min > 0.0 && params.illumination_min <= params.illumination_max)) {
    throw ConfigError("invalid augmentation parameters");
  }
  // Draw order is fixed so a seed always yields the same transform.
  const double angle = rng.uniform(-params.max_rotation_deg, params.max_rotation_deg);
  const auto dy = static_cast<long>(rng.between(-params.max_shift_px, params.max_shift_px));
  const auto dx = static_cast<long>(rng.between(-params.max_shift_px, params.max_shift_px));
  const double scale = rng.uniform(params.illumination_min, params.illumination_max);

  Image m = shift(rotate(face, angle), dy, dx);
  for (double& v : m.values()) v = std::clamp(v * scale, 0.0, 1.0);
  return window(m, (m.rows() - kFaceInput) / 2, (m.cols() - kFaceInput) / 2, kFaceInput, kFaceInput);
}

Image normalize_face(const Image& face) {
  if (face.empty()) throw DataError("cannot normalize an empty face");
  const double n = static_cast<double>(face.size());
  double mean = 0.0;
  for (double v : face.values()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : face.values()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  Image out(face.rows(), face.cols());
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < face.size(); ++i) out.values()[i] = (face.values()[i] - mean) / sd;
  return out;
}

}  // namespace affect::vision
