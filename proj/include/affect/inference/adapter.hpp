#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/core/error.hpp"
#include "affect/inference/classifier.hpp"

namespace affect::inference {

class AdapterError : public Error {
 public:
  using Error::Error;
};

// What an external inference engine has to provide. Inputs are handed over
// as row-major float32 of input_shape().
class InferenceRuntime {
 public:
  enum class Output { kProbabilities, kLogits };

  virtual ~InferenceRuntime() = default;
  virtual Shape input_shape() const = 0;
  virtual std::vector<std::string> output_labels() const = 0;
  virtual Output output_kind() const = 0;
  virtual std::vector<double> run(std::span<const float> input) const = 0;
};

using RuntimeLoader = std::function<std::unique_ptr<InferenceRuntime>(const std::filesystem::path&)>;

// Classifier over an external runtime. Probabilities are renormalized to
// sum to 1, logits go through softmax; nothing else is done to inputs or
// outputs.
class ExternalModelAdapter final : public Classifier {
 public:
  explicit ExternalModelAdapter(std::unique_ptr<InferenceRuntime> runtime);

  const std::vector<std::string>& class_order() const override { return classes_; }
  Shape input_shape() const override { return shape_; }
  ClassScores predict(const Matrix& input) const override;

 private:
  std::unique_ptr<InferenceRuntime> runtime_;
  std::vector<std::string> classes_;
  Shape shape_;
};

// Loads `model_file` through `loader`. Throws AdapterError when the file is
// missing, the loader fails, the runtime declares no usable classes, or its
// input shape differs from `expected_input`.
std::unique_ptr<Classifier> external_model_adapter(const std::filesystem::path& model_file,
                                                   const RuntimeLoader& loader,
                                                   std::optional<Shape> expected_input = std::nullopt);

}  // namespace affect::inference
