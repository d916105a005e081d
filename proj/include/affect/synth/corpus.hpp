#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "affect/audio/types.hpp"
#include "affect/cascade/labels.hpp"
#include "affect/cascade/manifest.hpp"
#include "affect/core/keyvalue.hpp"
#include "affect/core/random.hpp"
#include "affect/vision/gallery.hpp"
#include "affect/vision/types.hpp"

namespace affect::synth {

using cascade::AffectLabel;

// Knobs of the planted signals. Defaults give wide margins; shrinking them
// makes deliberately hard corpora.
struct SignalParams {
  double burst_peak_dbfs = -6.0;    // Negative: high-band noise bursts
  double burst_cover_min = 0.6;     // fraction of the clip covered by bursts
  double burst_cover_max = 0.8;
  double tone_peak_dbfs = -30.0;    // Non-negative: low tone, at most this loud
  double tone_hz_min = 150.0;
  double tone_hz_max = 900.0;
  double noise_dbfs = -70.0;        // background noise RMS
  double face_presence = 0.9;       // fraction of frames showing the child
  double distractor_rate = 0.2;     // fraction of frames with another face
  double label_noise = 0.0;         // fraction of child faces with the wrong expression
};

struct CorpusSpec {
  std::uint64_t seed = 1;
  int n_participants = 5;
  std::map<AffectLabel, int> clips_per_class = {
      {AffectLabel::kNegative, 20}, {AffectLabel::kNeutral, 20}, {AffectLabel::kPositive, 20}};
  double clip_seconds_min = 4.0;
  double clip_seconds_max = 6.0;
  std::uint32_t sample_rate_hz = 16000;
  double fps = 30.0;
  // Writes every frame instead of only the ones the default samplers read.
  bool store_all_frames = false;
  SignalParams signal;

  // Throws ConfigError.
  void validate() const;
  std::size_t total_clips() const;
};

// key=value form. Unknown keys raise ConfigError.
CorpusSpec parse_corpus_spec(const KeyValues& kv);
KeyValues corpus_spec_values(const CorpusSpec& spec);

// Planted audio signature; seconds >= 0.5.
audio::AudioBuffer gen_audio(AffectLabel label, double seconds, Rng& rng, std::uint32_t sample_rate_hz = 16000,
                             const SignalParams& params = {});

// Frame size of the synthetic video.
inline constexpr std::size_t kFrameRows = 96;
inline constexpr std::size_t kFrameCols = 80;
inline constexpr int kDistractorCode = 15;

// Ground truth of one rendered frame.
struct FrameTruth {
  bool child = false;
  bool distractor = false;
  bool smiling = false;  // expression actually drawn on the child
  vision::FaceBox child_box;
  vision::FaceBox distractor_box;
};

// Deterministic renderer for one clip: any frame can be drawn on its own,
// which is what allows sparse frame storage.
class ClipRenderer {
 public:
  ClipRenderer(AffectLabel label, int child_code, std::uint64_t seed, const SignalParams& params = {});

  vision::Image render(std::size_t frame_index, FrameTruth* truth = nullptr) const;

 private:
  AffectLabel label_;
  int code_;
  std::uint64_t seed_;
  SignalParams params_;
  int base_row_;
  int base_col_;
};

struct FrameSequence {
  std::vector<vision::Image> frames;
  std::vector<FrameTruth> truth;
};

// n_frames >= 1.
FrameSequence gen_frames(AffectLabel label, std::size_t n_frames, int child_code, Rng& rng,
                         const SignalParams& params = {});

// Identity code of participant i (0-based); codes 1..14 are children.
int participant_code(int participant_index);
std::string participant_id(int participant_index);

// One template per participant, embedded with the synthetic embedder.
vision::FaceGallery synthetic_gallery(int n_participants, double threshold = vision::kDefaultGalleryThreshold);

// Writes audio/, frames/, gallery.afgal, manifest.csv and corpus.cfg
// under out_dir and returns the manifest.
cascade::Manifest gen_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir);

}  // namespace affect::synth
