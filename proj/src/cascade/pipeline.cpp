#include "affect/cascade/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "affect/audio/wav.hpp"
#include "affect/core/keyvalue.hpp"
#include "affect/inference/imbalance.hpp"

namespace affect::cascade {

std::string_view to_string(Balance b) {
  switch (b) {
    case Balance::kWeighted:
      return "weighted";
    case Balance::kDownsample:
      return "downsample";
    case Balance::kNone:
      return "none";
  }
  return "?";
}

Balance parse_balance(std::string_view text) {
  if (text == "weighted") return Balance::kWeighted;
  if (text == "downsample") return Balance::kDownsample;
  if (text == "none") return Balance::kNone;
  throw ConfigError("balance must be weighted, downsample or none, got '" + std::string(text) + "'");
}

bool cascade_exclusive(const ClipDecision& d) {
  if (d.label == AffectLabel::kNegative) return d.stage1.negative && !d.stage2.has_value();
  return !d.stage1.negative && d.stage2.has_value() && d.stage2->label == d.label;
}

ClipDecision decide_clip(const std::string& clip_id, const std::string& participant_id,
                         std::optional<AffectLabel> truth, const Stage1Evidence& audio,
                         const std::function<Stage2Evidence()>& faces, const inference::Classifier& ser,
                         const audio::NormStats& stats, const inference::Classifier& fer,
                         const CascadeOptions& opts) {
  ClipDecision d;
  d.clip_id = clip_id;
  d.participant_id = participant_id;
  d.truth = truth;
  d.stage1 = stage1_decide(audio, ser, stats, opts.stage1);
  if (d.stage1.silent) d.flags.emplace_back(kFlagSilentAudio);
  if (d.stage1.negative) {
    d.label = AffectLabel::kNegative;
    return d;
  }
  d.stage2 = stage2_decide(faces(), fer, opts.stage2);
  d.label = d.stage2->label;
  d.discarded_frames = d.stage2->discarded_frames;
  if (d.stage2->no_votes) d.flags.emplace_back(kFlagNoVotes);
  return d;
}

ClipDecision classify_clip(const ManifestEntry& clip, const CascadeComponents& c, const FaceStack& stack) {
  if (c.ser == nullptr || c.fer == nullptr || c.gallery == nullptr) {
    throw ConfigError("cascade components are not initialized");
  }
  try {
    const auto audio = stage1_evidence(audio::read_wav(clip.audio_path), c.opts.stage1.features);
    auto faces = [&] {
      const vision::DirectoryFrameSource frames(clip.clip_id, clip.frames_dir);
      return stage2_evidence(frames, stack, c.opts.stage2.every_n_frames);
    };
    return decide_clip(clip.clip_id, clip.participant_id, clip.label, audio, faces, *c.ser, c.stats, *c.fer, c.opts);
  } catch (const ClipError&) {
    throw;
  } catch (const std::exception& e) {
    throw ClipError(clip.clip_id, e.what());
  }
}

ClipDecision classify_clip(const ManifestEntry& clip, const CascadeComponents& c) {
  if (c.gallery == nullptr) throw ConfigError("cascade components are not initialized");
  const auto det = c.detectors();
  const auto emb = c.embedders();
  return classify_clip(clip, c, FaceStack{*det, *emb, *c.gallery});
}

BatchResult classify_batch(std::span<const ManifestEntry> clips, const CascadeComponents& c, std::size_t workers) {
  if (c.gallery == nullptr) throw ConfigError("cascade components are not initialized");
  std::vector<std::optional<ClipDecision>> slots(clips.size());
  std::vector<std::string> errors(clips.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    const auto det = c.detectors();
    const auto emb = c.embedders();
    const FaceStack stack{*det, *emb, *c.gallery};
    for (std::size_t i = next++; i < clips.size(); i = next++) {
      try {
        slots[i] = classify_clip(clips[i], c, stack);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, clips.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  BatchResult out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (slots[i]) {
      out.decisions.push_back(std::move(*slots[i]));
    } else {
      out.failures.push_back({clips[i].clip_id, errors[i]});
    }
  }
  return out;
}

ClipTrainingData extract_training_data(const ManifestEntry& clip, const FaceStack& stack, const CascadeOptions& opts) {
  try {
    ClipTrainingData d;
    d.clip_id = clip.clip_id;
    d.label = clip.label;
    d.audio = stage1_evidence(audio::read_wav(clip.audio_path), opts.stage1.features);
    if (clip.label == AffectLabel::kNegative) return d;

    const vision::DirectoryFrameSource frames(clip.clip_id, clip.frames_dir);
    const auto mode = clip.label == AffectLabel::kPositive ? vision::SamplingMode::kTrainPositive
                                                           : vision::SamplingMode::kTrainNeutral;
    const auto id_hash = fnv1a(std::as_bytes(std::span<const char>(clip.clip_id.data(), clip.clip_id.size())));
    Rng rng(mix_seed(opts.train.seed ^ id_hash, 5));
    for (std::size_t idx : vision::sample_frame_indices(frames.descriptor(), mode)) {
      const vision::FrameRef frame{clip.clip_id, idx, frames.load(idx)};
      for (const auto& box : vision::detect_faces(frame, stack.detector)) {
        if (!vision::match_gallery(stack.embedder.embed(vision::crop(frame.image, box)), stack.gallery)) continue;
        if (auto x = fer_train_input(frame.image, box, rng, opts.augment)) d.faces.push_back(std::move(*x));
      }
    }
    return d;
  } catch (const std::exception& e) {
    throw ClipError(clip.clip_id, e.what());
  }
}

namespace {

inference::LinearModel fit_stage(std::vector<inference::LabeledExample> examples, const CascadeOptions& opts,
                                 std::uint64_t stream, const char* stage,
                                 std::initializer_list<std::string_view> classes, inference::TrainStats* stats) {
  std::vector<std::string> labels;
  for (const auto& e : examples) labels.push_back(e.label);
  const auto counts = inference::count_labels(labels);
  for (auto c : classes) {
    if (!counts.count(std::string(c))) {
      throw DataError(std::string(stage) + " training data has no '" + std::string(c) + "' examples");
    }
  }
  inference::TrainConfig cfg = opts.train;
  cfg.seed = mix_seed(opts.train.seed, stream);
  std::vector<double> weights;
  switch (opts.balance) {
    case Balance::kWeighted:
      weights = inference::sample_weights(labels);
      break;
    case Balance::kDownsample: {
      Rng rng(mix_seed(opts.train.seed, stream + 100));
      examples = inference::downsample(examples, rng);
      break;
    }
    case Balance::kNone:
      break;
  }
  return inference::train_linear(examples, cfg, weights, stats);
}

}  // namespace

CascadeModels train_cascade(std::span<const ClipTrainingData* const> clips, const CascadeOptions& opts,
                            TrainReport* report) {
  opts.train.validate();
  TrainReport rep;
  std::vector<Matrix> logmels;
  for (const auto* c : clips) logmels.insert(logmels.end(), c->audio.logmels.begin(), c->audio.logmels.end());
  if (logmels.empty()) throw DataError("stage 1 has no training segments");
  CascadeModels m;
  m.stats = audio::fit_norm_stats(logmels);
  logmels.clear();

  std::vector<inference::LabeledExample> s1;
  for (const auto* c : clips) {
    for (auto& x : stage1_inputs(c->audio, m.stats, opts.stage1.features)) {
      s1.push_back({std::move(x), std::string(stage1_class(c->label))});
    }
  }
  rep.stage1_segments = s1.size();
  m.ser = fit_stage(std::move(s1), opts, 1, "stage 1", {kNegative, kNonNegative}, &rep.stage1);

  std::vector<inference::LabeledExample> s2;
  for (const auto* c : clips) {
    if (c->label == AffectLabel::kNegative) continue;
    for (const auto& f : c->faces) s2.push_back({f, std::string(to_string(c->label))});
  }
  rep.stage2_faces = s2.size();
  m.fer = fit_stage(std::move(s2), opts, 2, "stage 2", {kNeutral, kPositive}, &rep.stage2);
  if (report != nullptr) *report = rep;
  return m;
}

CascadeModels train_cascade(std::span<const ClipTrainingData> clips, const CascadeOptions& opts, TrainReport* report) {
  std::vector<const ClipTrainingData*> ptrs;
  for (const auto& c : clips) ptrs.push_back(&c);
  return train_cascade(std::span<const ClipTrainingData* const>(ptrs), opts, report);
}

namespace {

const CsvRow kPredictionHeader = {"clip_id",          "participant_id",   "true_label",       "pred_label",
                                  "stage1_neg_ratio", "stage2_votes",     "stage2_pos_ratio", "discarded_frames",
                                  "flags"};

std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += ';';
    s += f;
  }
  return s;
}

}  // namespace

std::vector<PredictionRecord> to_records(std::span<const ClipDecision> decisions) {
  std::vector<PredictionRecord> out;
  for (const auto& d : decisions) {
    PredictionRecord r;
    r.clip_id = d.clip_id;
    r.participant_id = d.participant_id;
    r.truth = d.truth;
    r.pred = d.label;
    r.stage1_neg_ratio = d.stage1.neg_ratio;
    if (d.stage2) {
      r.stage2_votes = d.stage2->tally.votes.size();
      r.stage2_pos_ratio = d.stage2->tally.pos_ratio();
    }
    r.discarded_frames = d.discarded_frames;
    r.flags = d.flags;
    out.push_back(std::move(r));
  }
  return out;
}

CsvTable predictions_table(std::span<const ClipDecision> decisions) {
  CsvTable t;
  t.header = kPredictionHeader;
  for (const auto& r : to_records(decisions)) {
    t.rows.push_back({r.clip_id, r.participant_id, r.truth ? std::string(to_string(*r.truth)) : std::string(),
                      std::string(to_string(r.pred)), format_fixed(r.stage1_neg_ratio),
                      r.stage2_votes ? std::to_string(*r.stage2_votes) : std::string(),
                      r.stage2_pos_ratio ? format_fixed(*r.stage2_pos_ratio) : std::string(),
                      std::to_string(r.discarded_frames), join_flags(r.flags)});
  }
  return t;
}

void write_predictions(const std::filesystem::path& path, std::span<const ClipDecision> decisions) {
  write_csv(path, predictions_table(decisions));
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("predictions file not found: " + path.string());
  const CsvTable t = read_csv(path);
  const std::string origin = path.string();
  std::vector<std::size_t> col;
  for (const auto& name : kPredictionHeader) col.push_back(t.column(name, origin));
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = origin + " row " + std::to_string(i + 2);
    try {
      PredictionRecord r;
      r.clip_id = row[col[0]];
      r.participant_id = row[col[1]];
      if (!row[col[2]].empty()) r.truth = parse_affect_label(row[col[2]]);
      r.pred = parse_affect_label(row[col[3]]);
      r.stage1_neg_ratio = row[col[4]].empty() ? 0.0 : parse_double("stage1_neg_ratio", row[col[4]]);
      if (!row[col[5]].empty()) r.stage2_votes = static_cast<std::size_t>(parse_int("stage2_votes", row[col[5]]));
      if (!row[col[6]].empty()) r.stage2_pos_ratio = parse_double("stage2_pos_ratio", row[col[6]]);
      r.discarded_frames =
          row[col[7]].empty() ? 0 : static_cast<std::size_t>(parse_int("discarded_frames", row[col[7]]));
      std::string_view flags = row[col[8]];
      while (!flags.empty()) {
        const auto semi = flags.find(';');
        r.flags.emplace_back(flags.substr(0, semi));
        flags = semi == std::string_view::npos ? std::string_view{} : flags.substr(semi + 1);
      }
      out.push_back(std::move(r));
    } catch (const Error& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace affect::cascade
