#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "affect/cascade/manifest.hpp"
#include "affect/cascade/pipeline.hpp"
#include "affect/core/keyvalue.hpp"
#include "affect/metrics/report.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/gallery.hpp"

namespace affect::metrics {

using ParticipantGroup = std::set<std::string>;

struct FoldSpec {
  std::size_t fold_id = 0;
  ParticipantGroup held_out;
  ParticipantGroup train;
};

// One fold per participant group. Participants listed together in `merge`
// form one group; everyone else is a group alone. Groups are ordered by
// their smallest participant id. Throws ConfigError when k < 2, when a
// merge set names an unknown participant or overlaps another, or when the
// group count differs from k.
std::vector<FoldSpec> make_folds(std::span<const std::string> participant_ids, std::size_t k,
                                 std::span<const ParticipantGroup> merge = {});

// "p5+p6" -> {p5, p6}; several sets separated by ','.
std::vector<ParticipantGroup> parse_merge(std::string_view text);

struct CrossvalOptions {
  cascade::CascadeOptions cascade;
  F1Average f1_average = F1Average::kWeighted;
  AucLevel auc_level = AucLevel::kClip;
  std::size_t workers = 1;
  vision::DetectorFactory detectors = vision::synthetic_detector_factory();
  vision::EmbedderFactory embedders = vision::synthetic_embedder_factory();
};

struct FoldResult {
  FoldSpec spec;
  bool skipped = false;
  std::string skip_reason;
  std::size_t held_out_clips = 0;
  std::vector<cascade::ClipDecision> decisions;  // manifest order
  std::optional<EvaluationReport> metrics;
  cascade::TrainReport train;
};

struct CVReport {
  std::vector<FoldResult> folds;
  std::vector<cascade::ClipDecision> decisions;  // every evaluated clip, manifest order
  std::vector<cascade::ClipFailure> failures;    // clips whose data could not be read
  std::size_t skipped_clips = 0;                 // held out by skipped folds
  std::optional<EvaluationReport> pooled;        // absent when nothing was evaluated
  std::vector<ParticipantTransitions> stage1_transitions;
  std::vector<ParticipantTransitions> cascade_transitions;
};

// Extracts every clip's features once, then for each fold trains on the
// training groups and runs the cascade over the held-out clips. A fold
// whose training data lacks a class is skipped and recorded. Results do
// not depend on `workers`.
CVReport run_crossval(const cascade::Manifest& manifest, std::span<const FoldSpec> folds,
                      const vision::FaceGallery& gallery, const CrossvalOptions& opts);

// Writes pooled_metrics.csv, fold_metrics.csv, participant_transitions.csv,
// confusion.txt, summary.txt and predictions.csv into `dir`.
void write_cv_report(const std::filesystem::path& dir, const CVReport& report);

}  // namespace affect::metrics
