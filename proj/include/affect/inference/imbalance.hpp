#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "affect/core/random.hpp"
#include "affect/inference/linear.hpp"

namespace affect::inference {

using ClassCounts = std::map<std::string, long long>;

ClassCounts count_labels(std::span<const std::string> labels);

// Per-sample weight for each class, 1 / (n_classes * count). Every class
// then carries the same total weight and the weights sum to 1 over the
// data set. Throws ConfigError for a count below 1.
std::map<std::string, double> weighted_sampler(const ClassCounts& counts);

// Weight of each sample under weighted_sampler.
std::vector<double> sample_weights(std::span<const std::string> labels);

// Draws sample indices with probability proportional to their weight.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights);
  std::size_t draw(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

// Indices kept when every class is cut down to the minority count by
// seeded sampling without replacement. Returned in ascending order, so the
// relative order of the input is preserved.
std::vector<std::size_t> downsample_indices(std::span<const std::string> labels, Rng& rng);

std::vector<LabeledExample> downsample(std::span<const LabeledExample> data, Rng& rng);

}  // namespace affect::inference
