#include "affect/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <thread>

#include "affect/audio/formats.hpp"
#include "affect/audio/wav.hpp"
#include "affect/cascade/manifest.hpp"
#include "affect/cascade/pipeline.hpp"
#include "affect/core/binary_io.hpp"
#include "affect/core/csv.hpp"
#include "affect/core/error.hpp"
#include "affect/inference/linear.hpp"
#include "affect/metrics/crossval.hpp"
#include "affect/metrics/report.hpp"
#include "affect/synth/corpus.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/frames.hpp"
#include "affect/vision/gallery.hpp"

namespace affect::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kEffectiveConfig = "effective_config.cfg";

KeyValues apply_sets(KeyValues kv, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

fs::path gallery_path(const std::optional<fs::path>& flag, const cascade::Manifest& m) {
  return flag ? *flag : m.base_dir / "gallery.afgal";
}

// "clip <id>: " prefix unless the message already carries it.
std::string clip_message(const std::string& clip_id, const std::string& message) {
  const std::string prefix = "clip " + clip_id + ":";
  return message.rfind(prefix, 0) == 0 ? message : prefix + " " + message;
}

std::vector<std::string> participant_ids(const cascade::Manifest& m) {
  std::set<std::string> ids;
  for (const auto& e : m.entries) ids.insert(e.participant_id);
  return {ids.begin(), ids.end()};
}

// Shared options of the subcommands that load a RunConfig.
struct ConfigFlags {
  std::optional<fs::path> config;
  std::vector<std::string> sets;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "key=value run configuration file");
    sub->add_option("--set", sets, "override a config value (key=value), repeatable")->take_all();
  }
};

int cmd_synth(const std::optional<fs::path>& spec_path, const std::vector<std::string>& sets, const fs::path& out_dir,
              std::ostream& out) {
  const auto spec = synth::parse_corpus_spec(apply_sets(spec_path ? read_key_values(*spec_path) : KeyValues{}, sets));
  const auto manifest = synth::gen_corpus(spec, out_dir);
  out << "wrote " << manifest.entries.size() << " clips to " << out_dir.generic_string() << "\n";
  return kExitOk;
}

int cmd_spectrogram(const ConfigFlags& flags, const std::vector<fs::path>& wavs, const std::optional<fs::path>& norm,
                    const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  // The seed plays no part in feature extraction.
  KeyValues kv = apply_sets(flags.config ? read_key_values(*flags.config) : KeyValues{}, flags.sets);
  kv.try_emplace("seed", "0");
  const auto cfg = parse_run_config(kv);
  const auto& feat = cfg.cascade.stage1.features;
  const std::optional<audio::NormStats> stats = norm ? std::optional(audio::load_norm_stats(*norm)) : std::nullopt;
  fs::create_directories(out_dir);
  std::size_t written = 0;
  for (const auto& wav : wavs) {
    const auto ev = cascade::stage1_evidence(audio::read_wav(wav), feat);
    if (ev.silent) {
      err << "warning: " << wav.generic_string() << ": silent after trimming, no segments written\n";
      continue;
    }
    const auto mats = stats ? cascade::stage1_inputs(ev, *stats, feat) : ev.logmels;
    for (std::size_t s = 0; s < mats.size(); ++s) {
      char name[32];
      std::snprintf(name, sizeof name, "_seg%03zu.afmel", s);
      audio::save_spectrogram(out_dir / (wav.stem().string() + name), mats[s]);
      ++written;
    }
  }
  out << "wrote " << written << " spectrograms to " << out_dir.generic_string() << "\n";
  return kExitOk;
}

int cmd_gallery(const fs::path& crops_csv, const fs::path& out_path, std::ostream& out) {
  const auto table = read_csv(crops_csv);
  const auto id_col = table.column("identity", crops_csv.generic_string());
  const auto img_col = table.column("image_path", crops_csv.generic_string());
  const auto embedder = vision::synthetic_embedder_factory()();
  vision::FaceGallery gallery;
  for (const auto& row : table.rows) {
    fs::path p = row[img_col];
    if (p.is_relative()) p = crops_csv.parent_path() / p;
    gallery.add(row[id_col], embedder->embed(vision::read_pgm(p)));
  }
  if (gallery.empty()) throw DataError(crops_csv.generic_string() + ": no face crops listed");
  vision::save_gallery(out_path, gallery);
  out << "wrote gallery with " << gallery.size() << " entries to " << out_path.generic_string() << "\n";
  return kExitOk;
}

int cmd_train(const ConfigFlags& flags, const fs::path& manifest_path, const std::optional<fs::path>& gallery_flag,
              std::size_t workers, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto cfg = load_run_config(flags.config, flags.sets);
  const auto manifest = cascade::read_manifest(manifest_path);
  const auto gallery = vision::load_gallery(gallery_path(gallery_flag, manifest), cfg.gallery_threshold);
  const auto& clips = manifest.entries;

  std::vector<cascade::ClipTrainingData> data(clips.size());
  std::vector<std::string> errors(clips.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    const auto det = vision::synthetic_detector_factory()();
    const auto emb = vision::synthetic_embedder_factory()();
    const cascade::FaceStack stack{*det, *emb, gallery};
    for (std::size_t i = next++; i < clips.size(); i = next++) {
      try {
        data[i] = cascade::extract_training_data(clips[i], stack, cfg.cascade);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, clips.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < w; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  bool failed = false;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (errors[i].empty()) continue;
    err << "error: " << clip_message(clips[i].clip_id, errors[i]) << "\n";
    failed = true;
  }
  if (failed) return kExitData;

  cascade::TrainReport rep;
  const auto models = cascade::train_cascade(std::span<const cascade::ClipTrainingData>(data), cfg.cascade, &rep);
  fs::create_directories(out_dir);
  inference::save_model(out_dir / "ser.afmdl", models.ser);
  audio::save_norm_stats(out_dir / "norm.afnrm", models.stats);
  inference::save_model(out_dir / "fer.afmdl", models.fer);
  io::write_text(out_dir / kEffectiveConfig, format_key_values(run_config_values(cfg)));
  out << "stage 1: " << rep.stage1_segments << " segments, loss " << format_fixed(rep.stage1.initial_loss, 4)
      << " -> " << format_fixed(rep.stage1.final_loss, 4) << "\n"
      << "stage 2: " << rep.stage2_faces << " faces, loss " << format_fixed(rep.stage2.initial_loss, 4) << " -> "
      << format_fixed(rep.stage2.final_loss, 4) << "\n"
      << "wrote models to " << out_dir.generic_string() << "\n";
  return kExitOk;
}

int cmd_predict(const ConfigFlags& flags, const fs::path& manifest_path, const fs::path& models_dir,
                const std::optional<fs::path>& gallery_flag, std::size_t workers, const fs::path& out_csv,
                std::ostream& out, std::ostream& err) {
  // Without --config the configuration saved by train is used.
  const auto cfg = load_run_config(flags.config ? flags.config : std::optional(models_dir / kEffectiveConfig),
                                   flags.sets);
  const auto manifest = cascade::read_manifest(manifest_path);
  const auto gallery = vision::load_gallery(gallery_path(gallery_flag, manifest), cfg.gallery_threshold);
  const auto ser = inference::load_model(models_dir / "ser.afmdl");
  const auto fer = inference::load_model(models_dir / "fer.afmdl");
  cascade::CascadeComponents c;
  c.ser = &ser;
  c.stats = audio::load_norm_stats(models_dir / "norm.afnrm");
  c.fer = &fer;
  c.gallery = &gallery;
  c.opts = cfg.cascade;
  const auto batch = cascade::classify_batch(manifest.entries, c, workers);
  cascade::write_predictions(out_csv, batch.decisions);
  for (const auto& f : batch.failures) err << "error: " << clip_message(f.clip_id, f.message) << "\n";
  out << "classified " << batch.decisions.size() << " of " << manifest.entries.size() << " clips, wrote "
      << out_csv.generic_string() << "\n";
  return batch.failures.empty() ? kExitOk : kExitData;
}

int cmd_evaluate(const fs::path& predictions, const std::string& average, const std::optional<fs::path>& metrics_out,
                 std::ostream& out) {
  const auto avg = metrics::parse_f1_average(average);
  const auto records = cascade::read_predictions(predictions);
  const auto report = metrics::evaluate(records, avg);
  out << metrics::format_report(report);
  if (metrics_out) {
    CsvTable t;
    t.header = {"metric", "value"};
    for (const auto& [k, v] : metrics::metric_values(report)) t.rows.push_back({k, v});
    write_csv(*metrics_out, t);
  }
  return kExitOk;
}

int cmd_crossval(const ConfigFlags& flags, const fs::path& manifest_path, std::size_t k, const std::string& merge,
                 std::size_t workers, const std::optional<std::string>& auc_level,
                 const std::optional<fs::path>& gallery_flag, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  auto cfg = load_run_config(flags.config, flags.sets);
  if (auc_level) cfg.auc_level = metrics::parse_auc_level(*auc_level);
  const auto manifest = cascade::read_manifest(manifest_path);
  const auto gallery = vision::load_gallery(gallery_path(gallery_flag, manifest), cfg.gallery_threshold);
  const auto groups = metrics::parse_merge(merge);
  const auto ids = participant_ids(manifest);
  const auto folds = metrics::make_folds(ids, k, groups);

  metrics::CrossvalOptions opts;
  opts.cascade = cfg.cascade;
  opts.f1_average = cfg.f1_average;
  opts.auc_level = cfg.auc_level;
  opts.workers = workers;
  const auto rep = metrics::run_crossval(manifest, folds, gallery, opts);
  metrics::write_cv_report(out_dir, rep);
  io::write_text(out_dir / kEffectiveConfig, format_key_values(run_config_values(cfg)));

  for (const auto& f : rep.folds) {
    if (f.skipped) err << "warning: fold " << f.spec.fold_id << " skipped: " << f.skip_reason << "\n";
  }
  for (const auto& f : rep.failures) err << "error: " << clip_message(f.clip_id, f.message) << "\n";
  if (rep.pooled) out << metrics::format_report(*rep.pooled);
  out << "wrote cross-validation report to " << out_dir.generic_string() << "\n";
  if (!rep.pooled) {
    err << "error: no clip could be evaluated\n";
    return kExitData;
  }
  return rep.failures.empty() ? kExitOk : kExitData;
}

}  // namespace

RunConfig load_run_config(const std::optional<fs::path>& config, const std::vector<std::string>& sets) {
  return parse_run_config(apply_sets(config ? read_key_values(*config) : KeyValues{}, sets));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage affect classification of therapy clips", "affect"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled corpus");
  std::optional<fs::path> spec_path;
  std::vector<std::string> spec_sets;
  fs::path synth_out;
  synth->add_option("--spec", spec_path, "key=value corpus spec file");
  synth->add_option("--set", spec_sets, "override a spec value (key=value), repeatable")->take_all();
  synth->add_option("--out", synth_out, "output directory")->required();

  // spectrogram
  auto* spectro = app.add_subcommand("spectrogram", "convert WAV files to AFMEL1 log-Mel segments");
  ConfigFlags spectro_cfg;
  spectro_cfg.attach(spectro);
  std::vector<fs::path> wavs;
  std::optional<fs::path> spectro_norm;
  fs::path spectro_out;
  spectro->add_option("--wav", wavs, "input WAV file, repeatable")->required()->take_all();
  spectro->add_option("--norm", spectro_norm, "AFNRM1 stats; standardize (and resize) the segments");
  spectro->add_option("--out", spectro_out, "output directory")->required();

  // gallery
  auto* gal = app.add_subcommand("gallery", "build an AFGAL1 gallery from labelled face crops");
  fs::path crops_csv;
  fs::path gallery_out;
  gal->add_option("--crops", crops_csv, "CSV with columns identity,image_path (PGM crops)")->required();
  gal->add_option("--out", gallery_out, "output .afgal file")->required();

  // train
  auto* train = app.add_subcommand("train", "fit both stages on a manifest");
  ConfigFlags train_cfg;
  train_cfg.attach(train);
  fs::path train_manifest;
  std::optional<fs::path> train_gallery;
  std::size_t train_workers = 1;
  fs::path train_out;
  train->add_option("--manifest", train_manifest, "manifest CSV")->required();
  train->add_option("--gallery", train_gallery, "AFGAL1 gallery (default: gallery.afgal next to the manifest)");
  train->add_option("--workers", train_workers, "feature extraction threads")->check(CLI::PositiveNumber);
  train->add_option("--out", train_out, "output model directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "classify every clip of a manifest");
  ConfigFlags predict_cfg;
  predict_cfg.attach(predict);
  fs::path predict_manifest;
  fs::path models_dir;
  std::optional<fs::path> predict_gallery;
  std::size_t predict_workers = 1;
  fs::path predict_out;
  predict->add_option("--manifest", predict_manifest, "manifest CSV")->required();
  predict->add_option("--models", models_dir, "directory written by train")->required();
  predict->add_option("--gallery", predict_gallery, "AFGAL1 gallery (default: gallery.afgal next to the manifest)");
  predict->add_option("--workers", predict_workers, "classification threads")->check(CLI::PositiveNumber);
  predict->add_option("--out", predict_out, "output predictions CSV")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a predictions CSV");
  fs::path predictions;
  std::string average = "weighted";
  std::optional<fs::path> metrics_out;
  evaluate->add_option("--predictions", predictions, "predictions CSV")->required();
  evaluate->add_option("--f1-average", average, "weighted|macro|binary");
  evaluate->add_option("--out", metrics_out, "also write metric,value CSV here");

  // crossval
  auto* cv = app.add_subcommand("crossval", "participant-grouped k-fold cross-validation");
  ConfigFlags cv_cfg;
  cv_cfg.attach(cv);
  fs::path cv_manifest;
  std::size_t cv_k = 5;
  std::string cv_merge;
  std::size_t cv_workers = 1;
  std::optional<std::string> cv_auc;
  std::optional<fs::path> cv_gallery;
  fs::path cv_out;
  cv->add_option("--manifest", cv_manifest, "manifest CSV")->required();
  cv->add_option("--k", cv_k, "number of folds");
  cv->add_option("--merge", cv_merge, "participants sharing a fold, e.g. p5+p6,p7+p8");
  cv->add_option("--workers", cv_workers, "threads for clips and folds")->check(CLI::PositiveNumber);
  cv->add_option("--auc-level", cv_auc, "clip|segment (overrides auc_level)");
  cv->add_option("--gallery", cv_gallery, "AFGAL1 gallery (default: gallery.afgal next to the manifest)");
  cv->add_option("--out", cv_out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(spec_path, spec_sets, synth_out, out);
    if (*spectro) return cmd_spectrogram(spectro_cfg, wavs, spectro_norm, spectro_out, out, err);
    if (*gal) return cmd_gallery(crops_csv, gallery_out, out);
    if (*train) return cmd_train(train_cfg, train_manifest, train_gallery, train_workers, train_out, out, err);
    if (*predict) {
      return cmd_predict(predict_cfg, predict_manifest, models_dir, predict_gallery, predict_workers, predict_out, out,
                         err);
    }
    if (*evaluate) return cmd_evaluate(predictions, average, metrics_out, out);
    if (*cv) return cmd_crossval(cv_cfg, cv_manifest, cv_k, cv_merge, cv_workers, cv_auc, cv_gallery, cv_out, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("affect");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace affect::cli
