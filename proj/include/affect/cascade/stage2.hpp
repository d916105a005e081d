#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "affect/cascade/labels.hpp"
#include "affect/core/random.hpp"
#include "affect/inference/classifier.hpp"
#include "affect/vision/crop.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/frames.hpp"
#include "affect/vision/gallery.hpp"

namespace affect::cascade {

// Valid votes of one clip. Only kNeutral and kPositive appear.
struct VoteTally {
  std::vector<AffectLabel> votes;
  double threshold = 0.5;

  std::size_t positives() const;
  // Positives over votes; 0 for an empty tally.
  double pos_ratio() const;
};

// Positive iff votes are non-empty and pos_ratio >= T. Throws ConfigError
// unless 0 < T <= 1.
AffectLabel decide_votes(std::span<const AffectLabel> votes, double threshold);
AffectLabel decide_votes(const VoteTally& tally);

// FER classifier input for a test-time face: resized to 44x44 and
// normalized. nullopt for a degenerate box.
std::optional<Matrix> fer_test_input(const vision::Image& frame, const vision::FaceBox& box);

// Training-time input: random 44x44 window of the 48x48 face, or the full
// augmentation chain when `augment` is set.
std::optional<Matrix> fer_train_input(const vision::Image& frame, const vision::FaceBox& box, Rng& rng,
                                      const std::optional<vision::AugmentParams>& augment);

// Everything Stage 2 needs from a clip's frames, independent of the FER
// model: classifier inputs of all gallery-matched faces plus bookkeeping.
struct Stage2Evidence {
  std::vector<Matrix> faces;
  std::size_t frames_processed = 0;
  std::size_t discarded_frames = 0;  // frames without any matched face
  std::size_t faces_detected = 0;
};

struct FaceStack {
  const vision::FaceDetector& detector;
  const vision::FaceEmbedder& embedder;
  const vision::FaceGallery& gallery;
};

// Samples every n-th frame, detects, embeds and matches faces.
Stage2Evidence stage2_evidence(const vision::FrameSource& frames, const FaceStack& stack,
                               std::size_t every_n = vision::kTestEveryNFrames);

struct Stage2Options {
  double threshold = 0.5;
  std::size_t every_n_frames = vision::kTestEveryNFrames;
};

struct Stage2Result {
  AffectLabel label = AffectLabel::kNeutral;
  VoteTally tally;
  double mean_pos_prob = 0.0;
  std::size_t frames_processed = 0;
  std::size_t discarded_frames = 0;
  bool no_votes = false;
};

Stage2Result stage2_decide(const Stage2Evidence& ev, const inference::Classifier& fer, const Stage2Options& opts = {});

Stage2Result stage2_classify(const vision::FrameSource& frames, const FaceStack& stack,
                             const inference::Classifier& fer, const Stage2Options& opts = {});

}  // namespace affect::cascade
