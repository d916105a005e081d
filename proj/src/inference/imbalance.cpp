#include "affect/inference/imbalance.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/error.hpp"

namespace affect::inference {

ClassCounts count_labels(std::span<const std::string> labels) {
  ClassCounts counts;
  for (const auto& l : labels) ++counts[l];
  return counts;
}

std::map<std::string, double> weighted_sampler(const ClassCounts& counts) {
  if (counts.empty()) throw ConfigError("weighted sampler needs at least one class");
  std::map<std::string, double> w;
  const double k = static_cast<double>(counts.size());
  for (const auto& [label, n] : counts) {
    if (n < 1) throw ConfigError("class '" + label + "' has count " + std::to_string(n) + ", need at least 1");
    w[label] = 1.0 / (k * static_cast<double>(n));
  }
  return w;
}

std::vector<double> sample_weights(std::span<const std::string> labels) {
  const auto w = weighted_sampler(count_labels(labels));
  std::vector<double> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(w.at(l));
  return out;
}

WeightedSampler::WeightedSampler(std::span<const double> weights) {
  double acc = 0.0;
  cumulative_.reserve(weights.size());
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("sampling weights must be finite and non-negative");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!(acc > 0.0)) throw ConfigError("sampling weights sum to zero");
}

std::size_t WeightedSampler::draw(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

std::vector<std::size_t> downsample_indices(std::span<const std::string> labels, Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.empty()) return {};
  std::size_t minority = labels.size();
  for (const auto& [label, idx] : by_class) minority = std::min(minority, idx.size());

  std::vector<std::size_t> keep;
  for (auto& [label, idx] : by_class) {
    if (idx.size() > minority) {
      // Partial Fisher-Yates: the first `minority` slots end up a uniform
      // sample without replacement.
      for (std::size_t i = 0; i < minority; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(minority);
    }
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::vector<LabeledExample> downsample(std::span<const LabeledExample> data, Rng& rng) {
  std::vector<std::string> labels;
  labels.reserve(data.size());
  for (const auto& e : data) labels.push_back(e.label);
  std::vector<LabeledExample> out;
  for (std::size_t i : downsample_indices(labels, rng)) out.push_back(data[i]);
  return out;
}

}  // namespace affect::inference
