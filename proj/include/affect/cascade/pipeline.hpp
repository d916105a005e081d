#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/audio/types.hpp"
#include "affect/cascade/labels.hpp"
#include "affect/cascade/manifest.hpp"
#include "affect/cascade/stage1.hpp"
#include "affect/cascade/stage2.hpp"
#include "affect/core/csv.hpp"
#include "affect/core/error.hpp"
#include "affect/inference/linear.hpp"
#include "affect/vision/crop.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/gallery.hpp"

namespace affect::cascade {

enum class Balance { kWeighted, kDownsample, kNone };

std::string_view to_string(Balance b);
Balance parse_balance(std::string_view text);

struct CascadeOptions {
  Stage1Options stage1;
  Stage2Options stage2;
  inference::TrainConfig train;
  Balance balance = Balance::kWeighted;
  // Training-time face augmentation; nullopt uses the plain random crop.
  std::optional<vision::AugmentParams> augment = vision::AugmentParams{};
};

// Error raised for a single clip; carries the clip id.
class ClipError : public Error {
 public:
  ClipError(std::string clip_id, const std::string& what)
      : Error("clip " + clip_id + ": " + what), clip_id_(std::move(clip_id)) {}
  const std::string& clip_id() const { return clip_id_; }

 private:
  std::string clip_id_;
};

inline constexpr std::string_view kFlagSilentAudio = "silent_audio";
inline constexpr std::string_view kFlagNoVotes = "no_votes";

struct ClipDecision {
  std::string clip_id;
  std::string participant_id;
  std::optional<AffectLabel> truth;
  AffectLabel label = AffectLabel::kNeutral;
  Stage1Result stage1;
  std::optional<Stage2Result> stage2;  // present iff Stage 1 said NonNegative
  std::size_t discarded_frames = 0;
  std::vector<std::string> flags;
};

// Negative clips never have Stage-2 results and Positive/Neutral clips
// always have them.
bool cascade_exclusive(const ClipDecision& d);

// Runs Stage 1 on `audio`; only when it says NonNegative is `faces` called
// and Stage 2 decided.
ClipDecision decide_clip(const std::string& clip_id, const std::string& participant_id,
                         std::optional<AffectLabel> truth, const Stage1Evidence& audio,
                         const std::function<Stage2Evidence()>& faces, const inference::Classifier& ser,
                         const audio::NormStats& stats, const inference::Classifier& fer,
                         const CascadeOptions& opts);

// Trained parameters of both stages.
struct CascadeModels {
  inference::LinearModel ser;
  audio::NormStats stats;
  inference::LinearModel fer;
};

// Everything classify_clip needs. Detector and embedder instances are
// made per worker through the factories.
struct CascadeComponents {
  const inference::Classifier* ser = nullptr;
  audio::NormStats stats;
  const inference::Classifier* fer = nullptr;
  const vision::FaceGallery* gallery = nullptr;
  vision::DetectorFactory detectors = vision::synthetic_detector_factory();
  vision::EmbedderFactory embedders = vision::synthetic_embedder_factory();
  CascadeOptions opts;
};

// Reads the clip's audio and (if needed) frames from disk. Failures are
// rethrown as ClipError.
ClipDecision classify_clip(const ManifestEntry& clip, const CascadeComponents& c, const FaceStack& stack);
ClipDecision classify_clip(const ManifestEntry& clip, const CascadeComponents& c);

struct ClipFailure {
  std::string clip_id;
  std::string message;
};

struct BatchResult {
  std::vector<ClipDecision> decisions;  // manifest order, failed clips left out
  std::vector<ClipFailure> failures;
};

// Classifies every clip, optionally on several worker threads. Results do
// not depend on the worker count.
BatchResult classify_batch(std::span<const ManifestEntry> clips, const CascadeComponents& c, std::size_t workers = 1);

// Training material extracted from one clip.
struct ClipTrainingData {
  std::string clip_id;
  AffectLabel label = AffectLabel::kNeutral;
  Stage1Evidence audio;
  std::vector<Matrix> faces;  // FER inputs of gallery-matched faces, empty for Negative clips
};

// Audio evidence plus training faces (3 fps for Positive clips, 1 fps for
// Neutral). Face crops draw from a generator seeded by (seed, clip id).
ClipTrainingData extract_training_data(const ManifestEntry& clip, const FaceStack& stack, const CascadeOptions& opts);

struct TrainReport {
  std::size_t stage1_segments = 0;
  std::size_t stage2_faces = 0;
  inference::TrainStats stage1;
  inference::TrainStats stage2;
};

// Fits the norm stats on the training log-Mels, then both linear models.
// Throws DataError when a stage lacks one of its classes.
CascadeModels train_cascade(std::span<const ClipTrainingData* const> clips, const CascadeOptions& opts,
                            TrainReport* report = nullptr);
CascadeModels train_cascade(std::span<const ClipTrainingData> clips, const CascadeOptions& opts,
                            TrainReport* report = nullptr);

// Predictions table, header
// clip_id,participant_id,true_label,pred_label,stage1_neg_ratio,stage2_votes,stage2_pos_ratio,discarded_frames,flags
CsvTable predictions_table(std::span<const ClipDecision> decisions);
void write_predictions(const std::filesystem::path& path, std::span<const ClipDecision> decisions);

// The subset of a ClipDecision that survives the CSV.
struct PredictionRecord {
  std::string clip_id;
  std::string participant_id;
  std::optional<AffectLabel> truth;
  AffectLabel pred = AffectLabel::kNeutral;
  double stage1_neg_ratio = 0.0;
  std::optional<std::size_t> stage2_votes;
  std::optional<double> stage2_pos_ratio;
  std::size_t discarded_frames = 0;
  std::vector<std::string> flags;
};

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> to_records(std::span<const ClipDecision> decisions);

}  // namespace affect::cascade
