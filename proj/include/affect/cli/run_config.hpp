#pragma once

#include <cstdint>
#include <string>

#include "affect/cascade/pipeline.hpp"
#include "affect/core/keyvalue.hpp"
#include "affect/metrics/metrics.hpp"
#include "affect/metrics/report.hpp"
#include "affect/vision/gallery.hpp"

namespace affect::cli {

// Every tunable of a run.
struct RunConfig {
  cascade::CascadeOptions cascade;
  double gallery_threshold = vision::kDefaultGalleryThreshold;
  metrics::F1Average f1_average = metrics::F1Average::kWeighted;
  metrics::AucLevel auc_level = metrics::AucLevel::kClip;
  // stage1_input=resized feeds resize x resize log-Mels to Stage 1; the
  // default feeds the native 64 x frames log-Mel.
  bool stage1_resized = false;
  std::size_t resize = 224;
  std::uint64_t seed = 0;
};

// Keys: seg_seconds n_fft hop n_mels resize stage1_input gallery_threshold
// stage1_rule stage1_threshold stage2_every_n_frames stage2_threshold
// f1_average auc_level balance batch_size epochs learning_rate
// lr_decay_factor lr_decay_every optimizer augment noise_reduction_db
// silence_gate_db min_silence_ms seed.
// `seed` is required. Unknown keys, missing seed and bad values raise
// ConfigError naming the key.
RunConfig parse_run_config(const KeyValues& kv);

// Complete listing of the effective values; parse_run_config accepts it.
KeyValues run_config_values(const RunConfig& cfg);

}  // namespace affect::cli
