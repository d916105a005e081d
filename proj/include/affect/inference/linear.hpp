#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/core/matrix.hpp"
#include "affect/inference/classifier.hpp"

namespace affect::inference {

struct LabeledExample {
  Matrix features;
  std::string label;
};

// Multinomial logistic regression on flattened features.
class LinearModel final : public Classifier {
 public:
  LinearModel() = default;
  // Zero-initialized parameters.
  LinearModel(std::vector<std::string> class_order, Shape input_shape);
  LinearModel(std::vector<std::string> class_order, Shape input_shape, Matrix weights, std::vector<double> bias);

  const std::vector<std::string>& class_order() const override { return classes_; }
  Shape input_shape() const override { return input_shape_; }
  ClassScores predict(const Matrix& input) const override;

  std::vector<double> logits(std::span<const double> x) const;

  std::size_t n_classes() const { return classes_.size(); }
  std::size_t n_features() const { return input_shape_.size(); }
  const Matrix& weights() const { return weights_; }
  Matrix& weights() { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  std::vector<double>& bias() { return bias_; }

  bool operator==(const LinearModel& o) const {
    return classes_ == o.classes_ && input_shape_ == o.input_shape_ && weights_ == o.weights_ && bias_ == o.bias_;
  }

 private:
  std::vector<std::string> classes_;
  Shape input_shape_;
  Matrix weights_;  // n_classes x n_features
  std::vector<double> bias_;
};

enum class Optimizer { kAdam, kSgd };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view text);

struct TrainConfig {
  Optimizer optimizer = Optimizer::kAdam;  // beta1 0.9, beta2 0.999, eps 1e-8
  std::size_t batch_size = 32;
  std::size_t epochs = 25;
  double learning_rate = 0.001;
  double lr_decay_factor = 0.1;
  std::size_t lr_decay_every = 20;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

struct LossGradient {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

// Weighted mean cross-entropy sum_i w_i * CE_i / sum_i w_i over the batch
// and its gradient. Empty `weights` means all ones.
LossGradient loss_and_gradient(const LinearModel& model, std::span<const LabeledExample> batch,
                               std::span<const double> weights = {});

struct TrainStats {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t best_epoch = 0;  // 0 = initial parameters
};

// Mini-batch gradient descent with step decay. The input order does not
// matter: examples are put in a canonical content order before the seeded
// shuffle. The returned parameters are the ones with the lowest weighted
// loss over the full training set, starting from the zero model.
// Throws DataError for fewer than two classes or non-finite features and
// ShapeError for inconsistent feature shapes.
LinearModel train_linear(std::span<const LabeledExample> data, const TrainConfig& cfg,
                         std::span<const double> sample_weights = {}, TrainStats* stats = nullptr);

// AFMDL1 container.
std::vector<std::uint8_t> encode_model(const LinearModel& m);
LinearModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const std::filesystem::path& path, const LinearModel& m);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace affect::inference
