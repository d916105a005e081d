#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace affect {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool operator==(const Shape&) const = default;
  std::size_t size() const { return rows * cols; }
  std::string to_string() const;
};

// Dense row-major matrix of doubles. Used for spectrograms, images and
// model inputs alike.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Shape shape() const { return {rows_, cols_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double min_value(const Matrix& m);
double max_value(const Matrix& m);

}  // namespace affect
