#include "affect/synth/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "affect/audio/wav.hpp"
#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/frames.hpp"
#include "affect/vision/synthetic_face.hpp"

namespace affect::synth {

namespace syn = affect::vision::synthetic;

namespace {

double from_db(double db) { return std::pow(10.0, db / 20.0); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void CorpusSpec::validate() const {
  if (n_participants < 1 || n_participants > 14) throw ConfigError("n_participants must lie in [1, 14]");
  for (const auto& [label, n] : clips_per_class) {
    if (n < 0) throw ConfigError(std::string(cascade::to_string(label)) + " clip count must be >= 0");
  }
  if (total_clips() == 0) throw ConfigError("corpus spec asks for zero clips");
  if (!(clip_seconds_min >= 0.5) || !(clip_seconds_max >= clip_seconds_min)) {
    throw ConfigError("clip seconds must satisfy 0.5 <= min <= max");
  }
  if (sample_rate_hz < 8000) throw ConfigError("sample_rate_hz must be at least 8000");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  const auto& s = signal;
  if (!in_unit(s.face_presence) || !in_unit(s.distractor_rate) || !in_unit(s.label_noise)) {
    throw ConfigError("face_presence, distractor_rate and label_noise must lie in [0, 1]");
  }
  if (!(s.burst_cover_min > 0.0 && s.burst_cover_min <= s.burst_cover_max && s.burst_cover_max < 1.0)) {
    throw ConfigError("burst cover must satisfy 0 < min <= max < 1");
  }
  if (!(s.tone_hz_min > 0.0 && s.tone_hz_min <= s.tone_hz_max && s.tone_hz_max < sample_rate_hz / 2.0)) {
    throw ConfigError("tone band must lie inside (0, sample_rate/2)");
  }
  if (s.burst_peak_dbfs > 0.0 || s.tone_peak_dbfs > 0.0) throw ConfigError("signal peaks must be <= 0 dBFS");
}

std::size_t CorpusSpec::total_clips() const {
  std::size_t n = 0;
  for (const auto& [label, c] : clips_per_class) n += c > 0 ? static_cast<std::size_t>(c) : 0;
  return n;
}

CorpusSpec parse_corpus_spec(const KeyValues& kv) {
  CorpusSpec s;
  for (const auto& [key, value] : kv) {
    auto num = [&] { return parse_double(key, value); };
    auto integer = [&] { return parse_int(key, value); };
    if (key == "seed") {
      const auto v = integer();
      if (v < 0) throw ConfigError("seed must be non-negative");
      s.seed = static_cast<std::uint64_t>(v);
    } else if (key == "n_participants") {
      s.n_participants = static_cast<int>(integer());
    } else if (key == "negative_clips") {
      s.clips_per_class[AffectLabel::kNegative] = static_cast<int>(integer());
    } else if (key == "neutral_clips") {
      s.clips_per_class[AffectLabel::kNeutral] = static_cast<int>(integer());
    } else if (key == "positive_clips") {
      s.clips_per_class[AffectLabel::kPositive] = static_cast<int>(integer());
    } else if (key == "clip_seconds_min") {
      s.clip_seconds_min = num();
    } else if (key == "clip_seconds_max") {
      s.clip_seconds_max = num();
    } else if (key == "sample_rate_hz") {
      s.sample_rate_hz = static_cast<std::uint32_t>(integer());
    } else if (key == "fps") {
      s.fps = num();
    } else if (key == "store_all_frames") {
      if (value != "true" && value != "false") throw ConfigError("store_all_frames must be true or false");
      s.store_all_frames = value == "true";
    } else if (key == "burst_peak_dbfs") {
      s.signal.burst_peak_dbfs = num();
    } else if (key == "burst_cover_min") {
      s.signal.burst_cover_min = num();
    } else if (key == "burst_cover_max") {
      s.signal.burst_cover_max = num();
    } else if (key == "tone_peak_dbfs") {
      s.signal.tone_peak_dbfs = num();
    } else if (key == "tone_hz_min") {
      s.signal.tone_hz_min = num();
    } else if (key == "tone_hz_max") {
      s.signal.tone_hz_max = num();
    } else if (key == "noise_dbfs") {
      s.signal.noise_dbfs = num();
    } else if (key == "face_presence") {
      s.signal.face_presence = num();
    } else if (key == "distractor_rate") {
      s.signal.distractor_rate = num();
    } else if (key == "label_noise") {
      s.signal.label_noise = num();
    } else {
      throw ConfigError("unknown corpus spec key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

KeyValues corpus_spec_values(const CorpusSpec& spec) {
  KeyValues kv;
  auto count = [&](AffectLabel l) {
    const auto it = spec.clips_per_class.find(l);
    return std::to_string(it == spec.clips_per_class.end() ? 0 : it->second);
  };
  kv["seed"] = std::to_string(spec.seed);
  kv["n_participants"] = std::to_string(spec.n_participants);
  kv["negative_clips"] = count(AffectLabel::kNegative);
  kv["neutral_clips"] = count(AffectLabel::kNeutral);
  kv["positive_clips"] = count(AffectLabel::kPositive);
  kv["clip_seconds_min"] = shortest(spec.clip_seconds_min);
  kv["clip_seconds_max"] = shortest(spec.clip_seconds_max);
  kv["sample_rate_hz"] = std::to_string(spec.sample_rate_hz);
  kv["fps"] = shortest(spec.fps);
  kv["store_all_frames"] = spec.store_all_frames ? "true" : "false";
  const auto& s = spec.signal;
  kv["burst_peak_dbfs"] = shortest(s.burst_peak_dbfs);
  kv["burst_cover_min"] = shortest(s.burst_cover_min);
  kv["burst_cover_max"] = shortest(s.burst_cover_max);
  kv["tone_peak_dbfs"] = shortest(s.tone_peak_dbfs);
  kv["tone_hz_min"] = shortest(s.tone_hz_min);
  kv["tone_hz_max"] = shortest(s.tone_hz_max);
  kv["noise_dbfs"] = shortest(s.noise_dbfs);
  kv["face_presence"] = shortest(s.face_presence);
  kv["distractor_rate"] = shortest(s.distractor_rate);
  kv["label_noise"] = shortest(s.label_noise);
  return kv;
}

audio::AudioBuffer gen_audio(AffectLabel label, double seconds, Rng& rng, std::uint32_t sample_rate_hz,
                             const SignalParams& params) {
  if (!(seconds >= 0.5)) throw ConfigError("synthetic clips must be at least 0.5 s long");
  audio::AudioBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
  const double sr = sample_rate_hz;
  buf.samples.resize(n);
  const double noise = from_db(params.noise_dbfs);
  for (double& s : buf.samples) s = noise * rng.normal();

  if (label == AffectLabel::kNegative) {
    const double cover = rng.uniform(params.burst_cover_min, params.burst_cover_max);
    const double peak = from_db(params.burst_peak_dbfs);
    auto t = static_cast<std::size_t>(rng.uniform(0.0, 0.1) * sr);
    std::vector<double> w;
    while (t < n) {
      const auto len = static_cast<std::size_t>(rng.uniform(0.25, 0.6) * sr);
      const auto gap = static_cast<std::size_t>(static_cast<double>(len) * (1.0 - cover) / cover * rng.uniform(0.8, 1.2));
      const std::size_t end = std::min(n, t + len);
      // Second difference of white noise: a high-pass "scream" texture.
      w.assign(end - t + 2, 0.0);
      for (double& v : w) v = rng.normal();
      std::vector<double> hp(end - t);
      double max_abs = 0.0;
      for (std::size_t k = 0; k < hp.size(); ++k) {
        hp[k] = w[k + 2] - 2.0 * w[k + 1] + w[k];
        max_abs = std::max(max_abs, std::abs(hp[k]));
      }
      for (std::size_t k = 0; k < hp.size() && max_abs > 0.0; ++k) buf.samples[t + k] += hp[k] * peak / max_abs;
      t = end + gap;
    }
  } else {
    const double hz = rng.uniform(params.tone_hz_min, params.tone_hz_max);
    const double amp = from_db(params.tone_peak_dbfs) * rng.uniform(0.5, 0.9);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
      buf.samples[i] += amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sr + phase);
    }
  }
  for (double& s : buf.samples) s = std::clamp(s, -1.0, 1.0);
  return buf;
}

ClipRenderer::ClipRenderer(AffectLabel label, int child_code, std::uint64_t seed, const SignalParams& params)
    : label_(label), code_(child_code), seed_(seed), params_(params) {
  syn::hadamard_code(child_code);  // range check
  Rng rng(mix_seed(seed, 0xC11Bu));
  base_row_ = static_cast<int>(rng.between(4, 12));
  base_col_ = static_cast<int>(rng.between(4, 44));
}

vision::Image ClipRenderer::render(std::size_t frame_index, FrameTruth* truth) const {
  Rng rng(mix_seed(seed_, frame_index + 1));
  // All draws happen unconditionally so the stream layout is fixed.
  const bool child = rng.uniform() < params_.face_presence;
  const int jr = static_cast<int>(rng.between(-2, 2));
  const int jc = static_cast<int>(rng.between(-2, 2));
  const bool flip = rng.uniform() < params_.label_noise;
  const double smile_level = rng.uniform(0.85, 1.0);
  const double frown_level = rng.uniform(0.0, 0.15);
  const bool distractor = rng.uniform() < params_.distractor_rate;
  const int dr = static_cast<int>(rng.between(52, 60));
  const int dc = static_cast<int>(rng.between(4, 44));
  const double distractor_smile = rng.uniform();

  const bool smiling = (label_ == AffectLabel::kPositive) != flip;
  vision::Image img(kFrameRows, kFrameCols, 0.2);
  FrameTruth t;
  if (child) {
    const int r = base_row_ + jr, c = base_col_ + jc;
    syn::draw_face(img, r, c, code_, smiling ? smile_level : frown_level);
    t.child = true;
    t.smiling = smiling;
    t.child_box = {c, r, syn::kFaceSize, syn::kFaceSize, 1.0};
  }
  if (distractor) {
    syn::draw_face(img, dr, dc, kDistractorCode, distractor_smile);
    t.distractor = true;
    t.distractor_box = {dc, dr, syn::kFaceSize, syn::kFaceSize, 1.0};
  }
  for (double& v : img.values()) {
    if (v < vision::SyntheticMarkerDetector::kMarkerLevel) v = std::clamp(v + rng.uniform(-0.03, 0.03), 0.0, 0.97);
  }
  if (truth != nullptr) *truth = t;
  return img;
}

FrameSequence gen_frames(AffectLabel label, std::size_t n_frames, int child_code, Rng& rng,
                         const SignalParams& params) {
  if (n_frames < 1) throw ConfigError("gen_frames needs at least one frame");
  const ClipRenderer r(label, child_code, rng.next_u64(), params);
  FrameSequence seq;
  seq.frames.reserve(n_frames);
  seq.truth.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) seq.frames.push_back(r.render(i, &seq.truth[i]));
  return seq;
}

int participant_code(int participant_index) {
  if (participant_index < 0 || participant_index >= 14) throw ConfigError("participant index out of range");
  return participant_index + 1;
}

std::string participant_id(int participant_index) { return "p" + std::to_string(participant_index + 1); }

vision::FaceGallery synthetic_gallery(int n_participants, double threshold) {
  vision::FaceGallery g(threshold);
  const vision::SyntheticCodeEmbedder embedder;
  for (int p = 0; p < n_participants; ++p) {
    vision::Image tile(syn::kFaceSize, syn::kFaceSize);
    syn::draw_face(tile, 0, 0, participant_code(p), 0.5);
    g.add(participant_id(p), embedder.embed(tile));
  }
  return g;
}

cascade::Manifest gen_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "audio");
  fs::create_directories(out_dir / "frames");
  vision::save_gallery(out_dir / "gallery.afgal", synthetic_gallery(spec.n_participants));

  cascade::Manifest m;
  m.base_dir = out_dir;
  std::uint64_t clip_index = 0;
  for (const AffectLabel label : cascade::kAllLabels) {
    const auto it = spec.clips_per_class.find(label);
    const int count = it == spec.clips_per_class.end() ? 0 : it->second;
    for (int j = 0; j < count; ++j, ++clip_index) {
      char id[32];
      std::snprintf(id, sizeof id, "clip_%03llu", static_cast<unsigned long long>(clip_index + 1));
      const int participant = j % spec.n_participants;
      const std::uint64_t clip_seed = mix_seed(spec.seed, clip_index);
      Rng rng(clip_seed);
      const double seconds = rng.uniform(spec.clip_seconds_min, spec.clip_seconds_max);

      cascade::ManifestEntry e;
      e.clip_id = id;
      e.participant_id = participant_id(participant);
      e.label = label;
      e.audio_path = out_dir / "audio" / (e.clip_id + ".wav");
      e.frames_dir = out_dir / "frames" / e.clip_id;
      audio::write_wav(e.audio_path, gen_audio(label, seconds, rng, spec.sample_rate_hz, spec.signal));

      const auto n_frames = static_cast<std::size_t>(std::max<long long>(1, std::llround(seconds * spec.fps)));
      const vision::ClipDescriptor desc{e.clip_id, spec.fps, n_frames};
      std::set<std::size_t> needed;
      if (spec.store_all_frames) {
        for (std::size_t i = 0; i < n_frames; ++i) needed.insert(i);
      } else {
        for (auto i : vision::sample_frame_indices(desc, vision::SamplingMode::kTest)) needed.insert(i);
        if (label != AffectLabel::kNegative) {
          const auto mode = label == AffectLabel::kPositive ? vision::SamplingMode::kTrainPositive
                                                            : vision::SamplingMode::kTrainNeutral;
          for (auto i : vision::sample_frame_indices(desc, mode)) needed.insert(i);
        }
      }
      fs::create_directories(e.frames_dir);
      vision::DirectoryFrameSource::write_meta(e.frames_dir, spec.fps, n_frames);
      const ClipRenderer renderer(label, participant_code(participant), rng.next_u64(), spec.signal);
      for (std::size_t i : needed) {
        vision::write_pgm(e.frames_dir / vision::DirectoryFrameSource::frame_file_name(i), renderer.render(i));
      }
      m.entries.push_back(std::move(e));
    }
  }
  cascade::write_manifest(out_dir / "manifest.csv", m);
  io::write_text(out_dir / "corpus.cfg", format_key_values(corpus_spec_values(spec)));
  return m;
}

}  // namespace affect::synth
