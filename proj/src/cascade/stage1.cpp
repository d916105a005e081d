#include "affect/cascade/stage1.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/error.hpp"
#include "affect/core/resize.hpp"

namespace affect::cascade {

Stage1Evidence stage1_evidence(const audio::AudioBuffer& clip, const AudioFeatureOptions& opts) {
  if (clip.samples.empty()) throw DataError("empty audio clip");
  const auto gated = audio::spectral_gate(clip, opts.noise_reduction_db, opts.n_fft, opts.hop);
  const auto trimmed = audio::trim_silence(gated, opts.silence_gate_db, opts.min_silence_ms);
  Stage1Evidence ev;
  double peak = 0.0;
  for (double s : trimmed.samples) peak = std::max(peak, std::abs(s));
  if (peak < kSilencePeak) {
    ev.silent = true;
    return ev;
  }
  const auto fb = audio::build_mel_filterbank(clip.sample_rate_hz, opts.n_mels, opts.n_fft);
  for (const auto& seg : audio::segment(trimmed, opts.seg_seconds)) {
    ev.logmels.push_back(audio::log_mel(audio::stft_power(seg, opts.n_fft, opts.hop), fb).values);
  }
  return ev;
}

std::vector<Matrix> stage1_inputs(const Stage1Evidence& ev, const audio::NormStats& stats,
                                  const AudioFeatureOptions& opts) {
  std::vector<Matrix> out;
  out.reserve(ev.logmels.size());
  for (const auto& m : ev.logmels) {
    Matrix z = audio::standardize(m, stats);
    if (opts.resize > 0) z = resize_bilinear(z, opts.resize, opts.resize);
    out.push_back(std::move(z));
  }
  return out;
}

std::string_view to_string(Stage1Rule rule) {
  switch (rule) {
    case Stage1Rule::kRatio:
      return "ratio";
    case Stage1Rule::kAny:
      return "any";
    case Stage1Rule::kMean:
      return "mean";
  }
  return "?";
}

Stage1Rule parse_stage1_rule(std::string_view text) {
  if (text == "ratio") return Stage1Rule::kRatio;
  if (text == "any") return Stage1Rule::kAny;
  if (text == "mean") return Stage1Rule::kMean;
  throw ConfigError("stage1_rule must be ratio, any or mean, got '" + std::string(text) + "'");
}

Stage1Result aggregate_stage1(std::span<const inference::ClassScores> segment_scores, const Stage1Options& opts) {
  if (!(opts.threshold > 0.0 && opts.threshold <= 1.0)) throw ConfigError("stage1_threshold must lie in (0, 1]");
  Stage1Result r;
  if (segment_scores.empty()) return r;
  std::size_t neg = 0;
  double prob_sum = 0.0;
  for (const auto& s : segment_scores) {
    const double p = s.at(kNegative);
    r.segment_neg_probs.push_back(p);
    prob_sum += p;
    neg += s.top() == kNegative ? 1 : 0;
  }
  const double n = static_cast<double>(segment_scores.size());
  r.neg_ratio = static_cast<double>(neg) / n;
  r.mean_neg_prob = prob_sum / n;
  switch (opts.rule) {
    case Stage1Rule::kRatio:
      r.negative = r.neg_ratio >= opts.threshold;
      break;
    case Stage1Rule::kAny:
      r.negative = neg > 0;
      break;
    case Stage1Rule::kMean:
      r.negative = r.mean_neg_prob >= opts.threshold;
      break;
  }
  return r;
}

Stage1Result stage1_decide(const Stage1Evidence& ev, const inference::Classifier& ser, const audio::NormStats& stats,
                           const Stage1Options& opts) {
  const auto& classes = ser.class_order();
  if (std::find(classes.begin(), classes.end(), kNegative) == classes.end()) {
    throw ConfigError("stage-1 classifier has no '" + std::string(kNegative) + "' class");
  }
  if (ev.silent || ev.logmels.empty()) {
    Stage1Result r = aggregate_stage1({}, opts);
    r.silent = true;
    return r;
  }
  std::vector<inference::ClassScores> scores;
  for (const auto& x : stage1_inputs(ev, stats, opts.features)) scores.push_back(inference::predict_scores(ser, x));
  return aggregate_stage1(scores, opts);
}

Stage1Result stage1_classify(const audio::AudioBuffer& clip, const inference::Classifier& ser,
                             const audio::NormStats& stats, const Stage1Options& opts) {
  return stage1_decide(stage1_evidence(clip, opts.features), ser, stats, opts);
}

}  // namespace affect::cascade
