#pragma once

#include <cstddef>

#include "affect/core/matrix.hpp"

namespace affect {

// Bilinear interpolation with corner alignment: output corners sample the
// input corners exactly. Output values stay within the input range.
Matrix resize_bilinear(const Matrix& m, std::size_t out_rows = 224, std::size_t out_cols = 224);

}  // namespace affect
