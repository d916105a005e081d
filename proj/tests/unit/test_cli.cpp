#include <fstream>
#include <sstream>

#include "affect/cli/app.hpp"
#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/vision/frames.hpp"
#include "affect/vision/gallery.hpp"
#include "affect/vision/synthetic_face.hpp"
#include "doctest.h"
#include "support/tempdir.hpp"

using namespace affect;
using namespace affect::cli;
using affect::testing::TempDir;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

// Corpus small enough for unit tests: 2 participants, 12 short clips.
void small_corpus(const std::filesystem::path& dir) {
  const auto r = invoke({"synth", "--out", dir.string(), "--set", "n_participants=2", "negative_clips=4",
                         "neutral_clips=4", "positive_clips=4", "clip_seconds_min=2", "clip_seconds_max=3", "seed=5"});
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("run config defaults") {
  const auto c = parse_run_config({{"seed", "9"}});
  const auto kv = run_config_values(c);
  const std::map<std::string, std::string> expected = {
      {"seg_seconds", "3"},           {"n_fft", "2048"},        {"hop", "512"},
      {"n_mels", "64"},               {"resize", "224"},        {"stage1_input", "logmel"},
      {"gallery_threshold", "0.4"},   {"stage1_rule", "ratio"}, {"stage1_threshold", "0.5"},
      {"stage2_every_n_frames", "5"}, {"stage2_threshold", "0.5"}, {"f1_average", "weighted"},
      {"auc_level", "clip"},          {"balance", "weighted"},  {"batch_size", "32"},
      {"epochs", "25"},               {"learning_rate", "0.001"}, {"lr_decay_factor", "0.1"},
      {"lr_decay_every", "20"},       {"optimizer", "adam"},    {"augment", "true"},
      {"seed", "9"}};
  for (const auto& [k, v] : expected) {
    CAPTURE(k);
    REQUIRE(kv.count(k) == 1);
    CHECK(kv.at(k) == v);
  }
  CHECK(c.cascade.train.seed == 9);
  CHECK(c.cascade.stage1.features.resize == 0);
}

TEST_CASE("run config round trip and overrides") {
  const KeyValues kv = {{"seed", "3"},         {"stage1_input", "resized"}, {"resize", "96"},
                        {"balance", "downsample"}, {"stage1_rule", "mean"},  {"learning_rate", "0.0005"},
                        {"augment", "false"},  {"optimizer", "sgd"},        {"f1_average", "macro"}};
  const auto c = parse_run_config(kv);
  CHECK(c.cascade.stage1.features.resize == 96);
  CHECK(c.cascade.balance == cascade::Balance::kDownsample);
  CHECK_FALSE(c.cascade.augment.has_value());
  CHECK(c.cascade.train.optimizer == inference::Optimizer::kSgd);
  const auto values = run_config_values(c);
  CHECK(run_config_values(parse_run_config(values)) == values);
}

TEST_CASE("run config errors name the key") {
  auto message = [](const KeyValues& kv) {
    try {
      parse_run_config(kv);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(contains(message({}), "seed"));
  CHECK(contains(message({{"seed", "1"}, {"colour", "red"}}), "colour"));
  CHECK(contains(message({{"seed", "1"}, {"n_fft", "1000"}}), "n_fft"));
  CHECK(contains(message({{"seed", "1"}, {"stage2_threshold", "1.5"}}), "stage2_threshold"));
  CHECK(contains(message({{"seed", "1"}, {"epochs", "many"}}), "epochs"));
  CHECK(contains(message({{"seed", "1"}, {"balance", "oversample"}}), "balance"));
}

TEST_CASE("usage errors exit 1") {
  const auto unknown = invoke({"evaluate", "--predictions", "x.csv", "--bogus"});
  CHECK(unknown.code == kExitUsage);
  CHECK(contains(unknown.err, "Usage"));
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"--help"}).code == kExitOk);

  TempDir tmp("cli_usage");
  small_corpus(tmp / "corpus");
  const auto no_seed = invoke({"crossval", "--manifest", (tmp / "corpus" / "manifest.csv").string(), "--out",
                               (tmp / "cv").string()});
  CHECK(no_seed.code == kExitUsage);
  CHECK(contains(no_seed.err, "seed"));
  CHECK(invoke({"train", "--manifest", (tmp / "corpus" / "manifest.csv").string(), "--out", (tmp / "m").string(),
                "--set", "seed"})
            .code == kExitUsage);
}

TEST_CASE("data errors exit 2") {
  TempDir tmp("cli_data");
  const auto missing = invoke({"evaluate", "--predictions", (tmp / "nope.csv").string()});
  CHECK(missing.code == kExitData);
  CHECK(contains(missing.err, "nope.csv"));
  io::write_text(tmp / "bad.csv", "clip_id,participant_id\nc1,p1\n");
  CHECK(invoke({"evaluate", "--predictions", (tmp / "bad.csv").string()}).code == kExitData);
}

TEST_CASE("evaluate prints the overall accuracy of a hand-built table") {
  TempDir tmp("cli_eval");
  std::ostringstream csv;
  csv << "clip_id,participant_id,true_label,pred_label,stage1_neg_ratio,stage2_votes,stage2_pos_ratio,"
         "discarded_frames,flags\n";
  int id = 0;
  auto add = [&](const char* t, const char* p, int n) {
    for (int i = 0; i < n; ++i) csv << "c" << id++ << ",p1," << t << "," << p << ",0,,,0,\n";
  };
  // diagonal 285/43/13 of 471
  add("Neutral", "Neutral", 285);
  add("Neutral", "Positive", 82);
  add("Neutral", "Negative", 17);
  add("Positive", "Positive", 43);
  add("Positive", "Neutral", 22);
  add("Positive", "Negative", 3);
  add("Negative", "Negative", 13);
  add("Negative", "Neutral", 6);
  io::write_text(tmp / "pred.csv", csv.str());
  const auto r = invoke({"evaluate", "--predictions", (tmp / "pred.csv").string(), "--out",
                         (tmp / "metrics.csv").string()});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "overall accuracy: 72.40% (341/471)"));
  CHECK(contains(io::read_text(tmp / "metrics.csv"), "overall.accuracy,"));
}

TEST_CASE("gallery subcommand embeds crops") {
  TempDir tmp("cli_gallery");
  std::ostringstream csv;
  csv << "identity,image_path\n";
  for (int code = 1; code <= 3; ++code) {
    vision::Image tile(vision::synthetic::kFaceSize, vision::synthetic::kFaceSize);
    vision::synthetic::draw_face(tile, 0, 0, code, 0.5);
    const std::string name = "crop" + std::to_string(code) + ".pgm";
    vision::write_pgm(tmp / name, tile);
    csv << "p" << code << "," << name << "\n";
  }
  io::write_text(tmp / "crops.csv", csv.str());
  const auto r = invoke({"gallery", "--crops", (tmp / "crops.csv").string(), "--out", (tmp / "g.afgal").string()});
  REQUIRE(r.code == 0);
  const auto g = vision::load_gallery(tmp / "g.afgal");
  REQUIRE(g.size() == 3);
  // a fresh synthetic face of each identity matches its own entry
  for (int code = 1; code <= 3; ++code) {
    vision::Image probe(vision::synthetic::kFaceSize, vision::synthetic::kFaceSize);
    vision::synthetic::draw_face(probe, 0, 0, code, 0.9);
    const auto m = vision::match_gallery(vision::SyntheticCodeEmbedder{}.embed(probe), g);
    REQUIRE(m.has_value());
    CHECK(m->identity == "p" + std::to_string(code));
  }
}

TEST_CASE("synth, train, predict, evaluate and crossval wiring") {
  TempDir tmp("cli_e2e");
  const auto corpus = tmp / "corpus";
  small_corpus(corpus);
  const std::string manifest = (corpus / "manifest.csv").string();
  io::write_text(tmp / "run.cfg", "seed=11\nepochs=10\n");
  const std::string cfg = (tmp / "run.cfg").string();

  const auto train = invoke({"train", "--manifest", manifest, "--config", cfg, "--out", (tmp / "models").string()});
  REQUIRE(train.code == 0);
  for (const char* f : {"ser.afmdl", "fer.afmdl", "norm.afnrm", "effective_config.cfg"}) {
    CHECK(std::filesystem::exists(tmp / "models" / f));
  }
  CHECK(contains(io::read_text(tmp / "models" / "effective_config.cfg"), "epochs=10"));

  const auto p1 = invoke({"predict", "--manifest", manifest, "--models", (tmp / "models").string(), "--out",
                          (tmp / "p1.csv").string()});
  const auto p2 = invoke({"predict", "--manifest", manifest, "--models", (tmp / "models").string(), "--workers", "3",
                          "--out", (tmp / "p2.csv").string()});
  REQUIRE(p1.code == 0);
  REQUIRE(p2.code == 0);
  CHECK(io::read_file(tmp / "p1.csv") == io::read_file(tmp / "p2.csv"));
  CHECK(invoke({"evaluate", "--predictions", (tmp / "p1.csv").string()}).code == 0);

  const auto cv = invoke({"crossval", "--manifest", manifest, "--config", cfg, "--k", "2", "--auc-level", "segment",
                          "--set", "seed=12", "--out", (tmp / "cv").string()});
  CHECK(cv.code == 0);
  CHECK(contains(cv.out, "overall accuracy"));
  for (const char* f : {"predictions.csv", "pooled_metrics.csv", "fold_metrics.csv", "participant_transitions.csv",
                        "confusion.txt", "summary.txt", "effective_config.cfg"}) {
    CHECK(std::filesystem::exists(tmp / "cv" / f));
  }
  const auto eff = io::read_text(tmp / "cv" / "effective_config.cfg");
  CHECK(contains(eff, "seed=12"));
  CHECK(contains(eff, "auc_level=segment"));

  // a clip whose audio disappeared fails on its own
  std::filesystem::remove(corpus / "audio" / "clip_001.wav");
  const auto broken = invoke({"predict", "--manifest", manifest, "--models", (tmp / "models").string(), "--out",
                              (tmp / "p3.csv").string()});
  CHECK(broken.code == kExitData);
  CHECK(contains(broken.err, "clip_001"));
  CHECK(contains(broken.out, "classified 11 of 12"));
}

TEST_CASE("spectrogram subcommand") {
  TempDir tmp("cli_spec");
  small_corpus(tmp / "corpus");
  const auto r = invoke({"spectrogram", "--wav", (tmp / "corpus" / "audio" / "clip_001.wav").string(), "--out",
                         (tmp / "mel").string()});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(tmp / "mel" / "clip_001_seg000.afmel"));
}
