#include "affect/core/resize.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/error.hpp"

namespace affect {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (std::size_t i = 0; i < out; ++i) {
    const double src = static_cast<double>(i) * scale;
    const auto lo = std::min(static_cast<std::size_t>(std::floor(src)), in - 1);
    const std::size_t hi = std::min(lo + 1, in - 1);
    t[i] = {lo, hi, src - static_cast<double>(lo)};
  }
  return t;
}

}  // namespace

Matrix resize_bilinear(const Matrix& m, std::size_t out_rows, std::size_t out_cols) {
  if (m.empty()) throw DataError("resize_bilinear: empty input");
  if (out_rows == 0 || out_cols == 0) throw ConfigError("resize_bilinear: zero output size");
  const auto rt = taps(m.rows(), out_rows);
  const auto ct = taps(m.cols(), out_cols);
  Matrix out(out_rows, out_cols);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const auto [r0, r1, fr] = rt[r];
    for (std::size_t c = 0; c < out_cols; ++c) {
      const auto [c0, c1, fc] = ct[c];
      const double top = m(r0, c0) + (m(r0, c1) - m(r0, c0)) * fc;
      const double bot = m(r1, c0) + (m(r1, c1) - m(r1, c0)) * fc;
      out(r, c) = top + (bot - top) * fr;
    }
  }
  return out;
}

}  // namespace affect
