#include "affect/inference/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "affect/core/error.hpp"

namespace affect::inference {

ClassScores::ClassScores(std::vector<std::string> classes, std::vector<double> probs)
    : classes_(std::move(classes)), probs_(std::move(probs)) {
  if (classes_.empty() || classes_.size() != probs_.size()) {
    throw DataError("class scores need one probability per class (" + std::to_string(classes_.size()) +
                    " classes, " + std::to_string(probs_.size()) + " scores)");
  }
  if (std::set<std::string>(classes_.begin(), classes_.end()).size() != classes_.size()) {
    throw DataError("class scores have duplicate labels");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw DataError("class score outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw DataError("class scores sum to " + std::to_string(sum));
}

double ClassScores::at(std::string_view label) const {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i] == label) return probs_[i];
  }
  throw ConfigError("unknown class '" + std::string(label) + "'");
}

std::size_t ClassScores::argmax() const {
  if (probs_.empty()) throw DataError("argmax of empty class scores");
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

ClassScores predict_scores(const Classifier& classifier, const Matrix& input) {
  const Shape want = classifier.input_shape();
  if (input.shape() != want) {
    throw ShapeError("classifier expects input " + want.to_string() + ", got " + input.shape().to_string());
  }
  for (double v : input.values()) {
    if (!std::isfinite(v)) throw DataError("classifier input has a non-finite value");
  }
  return classifier.predict(input);
}

std::vector<std::string> class_order_of(std::span<const std::string> labels) {
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() < 2) {
    throw DataError("training needs at least two classes, found " + std::to_string(unique.size()));
  }
  return {unique.begin(), unique.end()};
}

}  // namespace affect::inference
