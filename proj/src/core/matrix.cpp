#include "affect/core/matrix.hpp"

#include <algorithm>

#include "affect/core/error.hpp"

namespace affect {

std::string Shape::to_string() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) +
                     " values, expected " + Shape{rows, cols}.to_string());
  }
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      out(c, r) = (*this)(r, c);
    }
  }
  return out;
}

double min_value(const Matrix& m) {
  if (m.empty()) throw DataError("min_value of empty matrix");
  return *std::min_element(m.values().begin(), m.values().end());
}

double max_value(const Matrix& m) {
  if (m.empty()) throw DataError("max_value of empty matrix");
  return *std::max_element(m.values().begin(), m.values().end());
}

}  // namespace affect
