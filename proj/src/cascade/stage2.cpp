#include "affect/cascade/stage2.hpp"

#include <algorithm>

#include "affect/core/error.hpp"
#include "affect/core/resize.hpp"

namespace affect::cascade {

std::size_t VoteTally::positives() const {
  return static_cast<std::size_t>(std::count(votes.begin(), votes.end(), AffectLabel::kPositive));
}

double VoteTally::pos_ratio() const {
  if (votes.empty()) return 0.0;
  return static_cast<double>(positives()) / static_cast<double>(votes.size());
}

AffectLabel decide_votes(std::span<const AffectLabel> votes, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("stage2_threshold must lie in (0, 1]");
  if (votes.empty()) return AffectLabel::kNeutral;
  std::size_t pos = 0;
  for (auto v : votes) {
    if (v == AffectLabel::kNegative) throw DataError("stage-2 votes must be Neutral or Positive");
    pos += v == AffectLabel::kPositive ? 1 : 0;
  }
  const double ratio = static_cast<double>(pos) / static_cast<double>(votes.size());
  return ratio >= threshold ? AffectLabel::kPositive : AffectLabel::kNeutral;
}

AffectLabel decide_votes(const VoteTally& tally) { return decide_votes(tally.votes, tally.threshold); }

std::optional<Matrix> fer_test_input(const vision::Image& frame, const vision::FaceBox& box) {
  Rng unused(0);
  auto crop = vision::prepare_face_crop(frame, box, vision::CropMode::kTest, unused);
  if (!crop) return std::nullopt;
  return vision::normalize_face(*crop);
}

std::optional<Matrix> fer_train_input(const vision::Image& frame, const vision::FaceBox& box, Rng& rng,
                                      const std::optional<vision::AugmentParams>& augment) {
  if (!augment) {
    auto crop = vision::prepare_face_crop(frame, box, vision::CropMode::kTrain, rng);
    if (!crop) return std::nullopt;
    return vision::normalize_face(*crop);
  }
  const auto clamped = vision::clamp_box(box, frame.rows(), frame.cols());
  if (!clamped) return std::nullopt;
  const auto big = resize_bilinear(vision::crop(frame, *clamped), vision::kTrainResize, vision::kTrainResize);
  return vision::normalize_face(vision::augment(big, rng, *augment));
}

Stage2Evidence stage2_evidence(const vision::FrameSource& frames, const FaceStack& stack, std::size_t every_n) {
  if (stack.gallery.empty()) throw ConfigError("stage 2 needs a non-empty face gallery");
  Stage2Evidence ev;
  const auto& desc = frames.descriptor();
  for (std::size_t idx : vision::sample_frame_indices(desc, vision::SamplingMode::kTest, every_n)) {
    const vision::FrameRef frame{desc.clip_id, idx, frames.load(idx)};
    ++ev.frames_processed;
    bool matched_any = false;
    for (const auto& box : vision::detect_faces(frame, stack.detector)) {
      ++ev.faces_detected;
      const auto face = vision::crop(frame.image, box);
      if (!vision::match_gallery(stack.embedder.embed(face), stack.gallery)) continue;
      if (auto input = fer_test_input(frame.image, box)) {
        ev.faces.push_back(std::move(*input));
        matched_any = true;
      }
    }
    if (!matched_any) ++ev.discarded_frames;
  }
  return ev;
}

Stage2Result stage2_decide(const Stage2Evidence& ev, const inference::Classifier& fer, const Stage2Options& opts) {
  const auto& classes = fer.class_order();
  if (std::find(classes.begin(), classes.end(), kPositive) == classes.end()) {
    throw ConfigError("stage-2 classifier has no '" + std::string(kPositive) + "' class");
  }
  Stage2Result r;
  r.tally.threshold = opts.threshold;
  r.frames_processed = ev.frames_processed;
  r.discarded_frames = ev.discarded_frames;
  double prob_sum = 0.0;
  for (const auto& face : ev.faces) {
    const auto s = inference::predict_scores(fer, face);
    prob_sum += s.at(kPositive);
    r.tally.votes.push_back(s.top() == kPositive ? AffectLabel::kPositive : AffectLabel::kNeutral);
  }
  r.label = decide_votes(r.tally);
  r.no_votes = r.tally.votes.empty();
  if (!r.no_votes) r.mean_pos_prob = prob_sum / static_cast<double>(r.tally.votes.size());
  return r;
}

Stage2Result stage2_classify(const vision::FrameSource& frames, const FaceStack& stack,
                             const inference::Classifier& fer, const Stage2Options& opts) {
  return stage2_decide(stage2_evidence(frames, stack, opts.every_n_frames), fer, opts);
}

}  // namespace affect::cascade
