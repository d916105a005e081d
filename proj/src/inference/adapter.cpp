#include "affect/inference/adapter.hpp"

#include <cmath>
#include <set>

namespace affect::inference {

ExternalModelAdapter::ExternalModelAdapter(std::unique_ptr<InferenceRuntime> runtime)
    : runtime_(std::move(runtime)) {
  if (!runtime_) throw AdapterError("no inference runtime");
  classes_ = runtime_->output_labels();
  shape_ = runtime_->input_shape();
  std::set<std::string> unique(classes_.begin(), classes_.end());
  if (classes_.empty() || unique.size() != classes_.size() || unique.count("") > 0) {
    throw AdapterError("runtime must declare unique, non-empty output labels");
  }
  if (shape_.size() == 0) throw AdapterError("runtime declares an empty input shape");
}

ClassScores ExternalModelAdapter::predict(const Matrix& input) const {
  if (input.shape() != shape_) {
    throw ShapeError("external model expects input " + shape_.to_string() + ", got " + input.shape().to_string());
  }
  std::vector<float> buf(input.values().begin(), input.values().end());
  std::vector<double> out;
  try {
    out = runtime_->run(buf);
  } catch (const std::exception& e) {
    throw AdapterError(std::string("inference runtime failed: ") + e.what());
  }
  if (out.size() != classes_.size()) {
    throw AdapterError("runtime returned " + std::to_string(out.size()) + " outputs for " +
                       std::to_string(classes_.size()) + " labels");
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw AdapterError("runtime returned a non-finite output");
  }
  if (runtime_->output_kind() == InferenceRuntime::Output::kLogits) return ClassScores(classes_, softmax(out));
  double sum = 0.0;
  for (double v : out) {
    if (v < 0.0) throw AdapterError("runtime returned a negative probability");
    sum += v;
  }
  if (!(sum > 0.0)) throw AdapterError("runtime probabilities sum to zero");
  for (double& v : out) v /= sum;
  return ClassScores(classes_, std::move(out));
}

std::unique_ptr<Classifier> external_model_adapter(const std::filesystem::path& model_file,
                                                   const RuntimeLoader& loader, std::optional<Shape> expected_input) {
  if (!std::filesystem::is_regular_file(model_file)) {
    throw AdapterError("model file not found: " + model_file.string());
  }
  if (!loader) throw AdapterError("no runtime loader configured");
  std::unique_ptr<InferenceRuntime> rt;
  try {
    rt = loader(model_file);
  } catch (const std::exception& e) {
    throw AdapterError("loading " + model_file.string() + " failed: " + e.what());
  }
  auto adapter = std::make_unique<ExternalModelAdapter>(std::move(rt));
  if (expected_input && adapter->input_shape() != *expected_input) {
    throw AdapterError("model " + model_file.string() + " takes " + adapter->input_shape().to_string() +
                       ", pipeline provides " + expected_input->to_string());
  }
  return adapter;
}

}  // namespace affect::inference
