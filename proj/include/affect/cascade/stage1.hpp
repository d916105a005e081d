#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "affect/audio/dsp.hpp"
#include "affect/audio/types.hpp"
#include "affect/cascade/labels.hpp"
#include "affect/inference/classifier.hpp"

namespace affect::cascade {

// Front-end settings shared by training and classification.
struct AudioFeatureOptions {
  double seg_seconds = audio::kDefaultSegmentSeconds;
  std::size_t n_fft = audio::kDefaultFft;
  std::size_t hop = audio::kDefaultHop;
  std::size_t n_mels = audio::kDefaultMels;
  double noise_reduction_db = audio::kDefaultNoiseReductionDb;
  double silence_gate_db = audio::kDefaultGateDb;
  double min_silence_ms = audio::kDefaultMinSilenceMs;
  // 0 keeps the native log-Mel size; otherwise segments are resized to
  // resize x resize after standardization.
  std::size_t resize = 0;
};

// Peak amplitude below which a trimmed clip counts as silent (-120 dBFS).
inline constexpr double kSilencePeak = 1e-6;

// Per-clip log-Mel segments before standardization.
struct Stage1Evidence {
  std::vector<Matrix> logmels;
  bool silent = false;
};

// Noise gate, silence trim, 3 s segmentation, log-Mel per segment.
Stage1Evidence stage1_evidence(const audio::AudioBuffer& clip, const AudioFeatureOptions& opts = {});

// Standardized (and optionally resized) classifier inputs.
std::vector<Matrix> stage1_inputs(const Stage1Evidence& ev, const audio::NormStats& stats,
                                  const AudioFeatureOptions& opts = {});

enum class Stage1Rule { kRatio, kAny, kMean };

std::string_view to_string(Stage1Rule rule);
Stage1Rule parse_stage1_rule(std::string_view text);

struct Stage1Options {
  Stage1Rule rule = Stage1Rule::kRatio;
  double threshold = 0.5;
  AudioFeatureOptions features;
};

struct Stage1Result {
  bool negative = false;
  double neg_ratio = 0.0;                 // fraction of segments predicted Negative
  double mean_neg_prob = 0.0;             // mean P(Negative) over segments
  std::vector<double> segment_neg_probs;  // per segment, for segment-level AUC
  bool silent = false;
};

// Segment->clip aggregation:
//   ratio: Negative iff neg_ratio >= threshold
//   any:   Negative iff at least one segment is predicted Negative
//   mean:  Negative iff mean P(Negative) >= threshold
Stage1Result aggregate_stage1(std::span<const inference::ClassScores> segment_scores, const Stage1Options& opts);

// Classifies precomputed evidence. Silent clips are NonNegative with
// neg_ratio 0 and `silent` set.
Stage1Result stage1_decide(const Stage1Evidence& ev, const inference::Classifier& ser, const audio::NormStats& stats,
                           const Stage1Options& opts = {});

Stage1Result stage1_classify(const audio::AudioBuffer& clip, const inference::Classifier& ser,
                             const audio::NormStats& stats, const Stage1Options& opts = {});

}  // namespace affect::cascade
