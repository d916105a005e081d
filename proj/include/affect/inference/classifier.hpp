#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affect/core/matrix.hpp"

namespace affect::inference {

// Probabilities aligned with a class order. Construction checks that every
// entry is in [0, 1] and that they sum to 1 within 1e-6.
class ClassScores {
 public:
  ClassScores() = default;
  ClassScores(std::vector<std::string> classes, std::vector<double> probs);

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

  // Throws ConfigError for a label outside the class set.
  double at(std::string_view label) const;
  // First index wins ties.
  std::size_t argmax() const;
  const std::string& top() const { return classes_[argmax()]; }

  bool operator==(const ClassScores&) const = default;

 private:
  std::vector<std::string> classes_;
  std::vector<double> probs_;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::vector<std::string>& class_order() const = 0;
  virtual Shape input_shape() const = 0;
  // Called only with inputs of input_shape().
  virtual ClassScores predict(const Matrix& input) const = 0;
};

// Shape-checked prediction. Throws ShapeError naming expected and actual
// shapes.
ClassScores predict_scores(const Classifier& classifier, const Matrix& input);

// Sorted unique labels; throws DataError if fewer than two remain.
std::vector<std::string> class_order_of(std::span<const std::string> labels);

}  // namespace affect::inference
