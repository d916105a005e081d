#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/cascade/pipeline.hpp"
#include "affect/core/csv.hpp"
#include "affect/core/keyvalue.hpp"
#include "affect/metrics/metrics.hpp"

namespace affect::metrics {

// Which scores feed the Stage-1 ROC-AUC: one neg_ratio per clip, or one
// P(Negative) per audio segment labeled with its clip's truth.
enum class AucLevel { kClip, kSegment };

std::string_view to_string(AucLevel level);
AucLevel parse_auc_level(std::string_view text);

// Metrics of the whole cascade and of each stage on its own.
//   overall: 3 classes over every clip
//   stage1:  Negative vs NonNegative over every clip
//   stage2:  Neutral vs Positive over clips that reached Stage 2 and are
//            truly Neutral or Positive
struct EvaluationReport {
  ConfusionMatrix overall;
  ConfusionMatrix stage1;
  ConfusionMatrix stage2;
  MetricsReport overall_metrics;
  MetricsReport stage1_metrics;
  std::optional<MetricsReport> stage2_metrics;  // absent when no clip qualifies
};

// Binary F1 averaging applies to the stage matrices; the 3-class matrix
// falls back to weighted. Stage-1 AUC uses stage1_neg_ratio and Stage-2 AUC uses stage2_pos_ratio;
// either is absent when its truth is single-class. Records without a true
// label raise DataError, as does an empty input.
EvaluationReport evaluate(std::span<const cascade::PredictionRecord> records,
                          F1Average average = F1Average::kWeighted);

// Same, with the Stage-1 AUC computed at the requested level.
EvaluationReport evaluate(std::span<const cascade::ClipDecision> decisions, F1Average average, AucLevel level);

// Flat metric listing such as overall.accuracy or stage1.recall.Negative.
// Undefined values are left out.
KeyValues metric_values(const EvaluationReport& r);

// Human-readable summary printed by the CLI.
std::string format_report(const EvaluationReport& r);

// Plain-text grid, rows are true labels.
std::string format_confusion(const ConfusionMatrix& cm, std::string_view title);

// Transition fractions per participant. At stage 1 labels collapse to
// neg / non-neg; at the cascade level they are neg / neu / pos.
enum class TransitionLevel { kStage1, kCascade };

struct ParticipantTransitions {
  std::string participant_id;
  long long clips = 0;
  std::map<std::string, double> fractions;  // e.g. neg_to_non-neg -> 0.25
};

std::vector<ParticipantTransitions> per_participant_report(std::span<const cascade::PredictionRecord> records,
                                                           TransitionLevel level = TransitionLevel::kCascade);

// Long form: participant_id,level,clips,transition,fraction. Fractions of
// one (participant, level) pair sum to 1.
CsvTable transitions_table(std::span<const ParticipantTransitions> stage1,
                           std::span<const ParticipantTransitions> cascade);

}  // namespace affect::metrics
