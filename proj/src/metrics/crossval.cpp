#include "affect/metrics/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "affect/core/binary_io.hpp"
#include "affect/core/csv.hpp"
#include "affect/core/error.hpp"
#include "affect/vision/frames.hpp"

namespace affect::metrics {

using cascade::ClipDecision;
using cascade::ClipTrainingData;

namespace {

// Runs job(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, n));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

std::string join_group(const ParticipantGroup& g) {
  std::string s;
  for (const auto& p : g) s += (s.empty() ? "" : "+") + p;
  return s;
}

struct FoldOutput {
  FoldResult result;
  std::vector<std::size_t> clip_index;  // manifest index of each decision
  std::vector<std::pair<std::size_t, cascade::ClipFailure>> failures;
};

}  // namespace

std::vector<FoldSpec> make_folds(std::span<const std::string> participant_ids, std::size_t k,
                                 std::span<const ParticipantGroup> merge) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2 folds");
  const ParticipantGroup all(participant_ids.begin(), participant_ids.end());
  std::map<std::string, std::size_t> group_of;
  std::vector<ParticipantGroup> groups;
  for (const auto& m : merge) {
    if (m.empty()) throw ConfigError("empty merge group");
    for (const auto& p : m) {
      if (!all.count(p)) throw ConfigError("merge group names unknown participant '" + p + "'");
      if (group_of.count(p)) throw ConfigError("participant '" + p + "' appears in two merge groups");
      group_of[p] = groups.size();
    }
    groups.push_back(m);
  }
  for (const auto& p : all) {
    if (!group_of.count(p)) groups.push_back({p});
  }
  if (groups.size() != k) {
    throw ConfigError("k=" + std::to_string(k) + " folds requested but participants form " +
                      std::to_string(groups.size()) + " groups");
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  std::vector<FoldSpec> folds;
  for (std::size_t f = 0; f < groups.size(); ++f) {
    FoldSpec spec;
    spec.fold_id = f + 1;
    spec.held_out = groups[f];
    for (const auto& p : all) {
      if (!groups[f].count(p)) spec.train.insert(p);
    }
    folds.push_back(std::move(spec));
  }
  return folds;
}

std::vector<ParticipantGroup> parse_merge(std::string_view text) {
  std::vector<ParticipantGroup> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view set = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    ParticipantGroup g;
    while (!set.empty()) {
      const auto plus = set.find('+');
      std::string_view id = set.substr(0, plus);
      set = plus == std::string_view::npos ? std::string_view{} : set.substr(plus + 1);
      while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
      while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
      if (id.empty()) throw ConfigError("empty participant id in merge list");
      g.emplace(id);
    }
    if (g.size() < 2) throw ConfigError("a merge group needs at least two participants");
    out.push_back(std::move(g));
  }
  return out;
}

CVReport run_crossval(const cascade::Manifest& manifest, std::span<const FoldSpec> folds,
                      const vision::FaceGallery& gallery, const CrossvalOptions& opts) {
  const auto& clips = manifest.entries;
  const std::size_t n = clips.size();

  // Features of each clip are computed once and shared by all folds.
  std::vector<std::optional<ClipTrainingData>> data(n);
  std::vector<std::string> errors(n);
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      const auto det = opts.detectors();
      const auto emb = opts.embedders();
      const cascade::FaceStack stack{*det, *emb, gallery};
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          data[i] = cascade::extract_training_data(clips[i], stack, opts.cascade);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const std::size_t w = std::clamp<std::size_t>(opts.workers, 1, std::max<std::size_t>(1, n));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < w; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }

  std::vector<FoldOutput> outputs(folds.size());
  parallel_for(folds.size(), opts.workers, [&](std::size_t f) {
    FoldOutput& out = outputs[f];
    FoldResult& fr = out.result;
    fr.spec = folds[f];
    std::vector<const ClipTrainingData*> train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < n; ++i) {
      if (!data[i]) continue;
      if (fr.spec.held_out.count(clips[i].participant_id)) {
        held.push_back(i);
      } else if (fr.spec.train.count(clips[i].participant_id)) {
        train.push_back(&*data[i]);
      }
    }
    fr.held_out_clips = held.size();
    std::optional<cascade::CascadeModels> models;
    try {
      models = cascade::train_cascade(train, opts.cascade, &fr.train);
    } catch (const DataError& e) {
      fr.skipped = true;
      fr.skip_reason = e.what();
      return;
    }
    const auto det = opts.detectors();
    const auto emb = opts.embedders();
    const cascade::FaceStack stack{*det, *emb, gallery};
    for (std::size_t i : held) {
      const auto& clip = clips[i];
      auto faces = [&] {
        const vision::DirectoryFrameSource frames(clip.clip_id, clip.frames_dir);
        return cascade::stage2_evidence(frames, stack, opts.cascade.stage2.every_n_frames);
      };
      try {
        fr.decisions.push_back(cascade::decide_clip(clip.clip_id, clip.participant_id, clip.label, data[i]->audio,
                                                    faces, models->ser, models->stats, models->fer, opts.cascade));
        out.clip_index.push_back(i);
      } catch (const std::exception& e) {
        out.failures.push_back({i, {clip.clip_id, e.what()}});
      }
    }
    if (!fr.decisions.empty()) fr.metrics = evaluate(fr.decisions, opts.f1_average, opts.auc_level);
  });

  CVReport rep;
  std::vector<std::pair<std::size_t, const ClipDecision*>> pooled;
  std::vector<std::pair<std::size_t, cascade::ClipFailure>> failures;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data[i]) failures.push_back({i, {clips[i].clip_id, errors[i]}});
  }
  for (auto& out : outputs) {
    if (out.result.skipped) rep.skipped_clips += out.result.held_out_clips;
    for (std::size_t j = 0; j < out.result.decisions.size(); ++j) {
      pooled.emplace_back(out.clip_index[j], &out.result.decisions[j]);
    }
    failures.insert(failures.end(), out.failures.begin(), out.failures.end());
  }
  std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [i, d] : pooled) rep.decisions.push_back(*d);
  for (auto& [i, f] : failures) rep.failures.push_back(std::move(f));
  for (auto& out : outputs) rep.folds.push_back(std::move(out.result));
  if (!rep.decisions.empty()) {
    rep.pooled = evaluate(rep.decisions, opts.f1_average, opts.auc_level);
    const auto records = cascade::to_records(rep.decisions);
    rep.stage1_transitions = per_participant_report(records, TransitionLevel::kStage1);
    rep.cascade_transitions = per_participant_report(records, TransitionLevel::kCascade);
  }
  return rep;
}

void write_cv_report(const std::filesystem::path& dir, const CVReport& report) {
  std::filesystem::create_directories(dir);
  cascade::write_predictions(dir / "predictions.csv", report.decisions);

  const KeyValues pooled = report.pooled ? metric_values(*report.pooled) : KeyValues{};
  CsvTable pm;
  pm.header = {"metric", "value"};
  for (const auto& [k, v] : pooled) pm.rows.push_back({k, v});
  write_csv(dir / "pooled_metrics.csv", pm);

  std::vector<KeyValues> per_fold;
  std::set<std::string> columns;
  for (const auto& f : report.folds) {
    per_fold.push_back(f.metrics ? metric_values(*f.metrics) : KeyValues{});
    for (const auto& [k, v] : per_fold.back()) columns.insert(k);
  }
  CsvTable fm;
  fm.header = {"fold_id", "held_out", "held_out_clips", "status", "reason"};
  fm.header.insert(fm.header.end(), columns.begin(), columns.end());
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    CsvRow row = {std::to_string(f.spec.fold_id), join_group(f.spec.held_out), std::to_string(f.held_out_clips),
                  f.skipped ? "skipped" : "evaluated", f.skip_reason};
    for (const auto& c : columns) {
      const auto it = per_fold[i].find(c);
      row.push_back(it == per_fold[i].end() ? "" : it->second);
    }
    fm.rows.push_back(std::move(row));
  }
  write_csv(dir / "fold_metrics.csv", fm);

  write_csv(dir / "participant_transitions.csv",
            transitions_table(report.stage1_transitions, report.cascade_transitions));

  std::ostringstream grids;
  if (report.pooled) {
    grids << format_confusion(report.pooled->overall, "pooled overall") << "\n"
          << format_confusion(report.pooled->stage1, "pooled stage 1") << "\n"
          << format_confusion(report.pooled->stage2, "pooled stage 2");
  }
  for (const auto& f : report.folds) {
    if (!f.metrics) continue;
    grids << "\n" << format_confusion(f.metrics->overall, "fold " + std::to_string(f.spec.fold_id) + " overall");
  }
  io::write_text(dir / "confusion.txt", grids.str());

  KeyValues summary = pooled;
  std::size_t skipped_folds = 0;
  for (const auto& f : report.folds) skipped_folds += f.skipped ? 1 : 0;
  summary["clips_evaluated"] = std::to_string(report.decisions.size());
  summary["clips_failed"] = std::to_string(report.failures.size());
  summary["clips_skipped"] = std::to_string(report.skipped_clips);
  summary["folds"] = std::to_string(report.folds.size());
  summary["folds_skipped"] = std::to_string(skipped_folds);
  io::write_text(dir / "summary.txt", format_key_values(summary));
}

}  // namespace affect::metrics
