// Acceptance run: one PASS/FAIL line per criterion. A criterion passes only
// when its check holds and it finished inside its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "affect/audio/dsp.hpp"
#include "affect/audio/formats.hpp"
#include "affect/cascade/pipeline.hpp"
#include "affect/cascade/stage2.hpp"
#include "affect/cli/run_config.hpp"
#include "affect/core/binary_io.hpp"
#include "affect/core/random.hpp"
#include "affect/inference/imbalance.hpp"
#include "affect/inference/linear.hpp"
#include "affect/metrics/crossval.hpp"
#include "affect/metrics/metrics.hpp"
#include "affect/metrics/report.hpp"
#include "affect/synth/corpus.hpp"
#include "affect/vision/gallery.hpp"
#include "support/gradient_check.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace affect;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool within_pp(double fraction, double pct) { return std::abs(100.0 * fraction - pct) <= 0.01 + 1e-9; }

Check ac1_metrics() {
  Check c;
  using metrics::confusion_from_counts;
  const auto s1 = metrics::summarize(confusion_from_counts({"Negative", "NonNegative"}, {{13, 6}, {20, 432}}));
  c.require(within_pp(s1.accuracy, 94.48), "stage-1 accuracy " + fmt("%.4f", 100 * s1.accuracy));
  c.require(within_pp(*s1.recall_of("Negative"), 68.42), "Negative recall");
  c.require(within_pp(*s1.recall_of("NonNegative"), 95.57), "NonNegative recall");
  const auto all = metrics::summarize(
      confusion_from_counts({"Negative", "Neutral", "Positive"}, {{13, 6, 0}, {17, 285, 82}, {3, 22, 43}}));
  c.require(all.total == 471, "overall total");
  c.require(within_pp(all.accuracy, 72.40), "overall accuracy " + fmt("%.4f", 100 * all.accuracy));
  if (c.ok) {
    c.detail = "stage1 " + fmt("%.2f%%", 100 * s1.accuracy) + ", recalls " +
               fmt("%.2f%%", 100 * *s1.recall_of("Negative")) + "/" +
               fmt("%.2f%%", 100 * *s1.recall_of("NonNegative")) + ", overall " + fmt("%.2f%%", 100 * all.accuracy);
  }
  return c;
}

Check ac2_dsp() {
  Check c;
  const testing::NaiveDftOracle oracle(2048);
  Rng rng(20240601);
  double worst = 0.0;
  for (int b = 0; b < 50 && c.ok; ++b) {
    std::vector<double> x(48000);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const auto p = audio::stft_power(x, 2048, 512);
    const auto ref = oracle.power(x, 512);
    if (p.rows() != ref.size() || p.cols() != ref[0].size()) {
      c.require(false, "shape mismatch");
      break;
    }
    double num = 0, den = 0;
    for (std::size_t k = 0; k < p.rows(); ++k) {
      for (std::size_t f = 0; f < p.cols(); ++f) {
        const double d = p(k, f) - ref[k][f];
        num += d * d;
        den += ref[k][f] * ref[k][f];
      }
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  c.require(worst <= 1e-6, "relative Frobenius error " + fmt("%.3g", worst));
  // Tones centred on a bin peak at that bin in every frame whose window lies
  // inside the signal. Padded edge frames see a reflected, non-sinusoidal
  // signal and are covered by the oracle comparison above.
  std::size_t checked = 0;
  for (std::size_t bin : {5, 16, 64, 128, 300, 777, 1000}) {
    for (double phase : {0.0, 0.7, 2.1}) {
      const double hz = static_cast<double>(bin) * 16000.0 / 2048.0;
      std::vector<double> x(48000);
      for (std::size_t n = 0; n < x.size(); ++n) {
        x[n] = 0.5 * std::sin(2 * std::numbers::pi * hz * static_cast<double>(n) / 16000.0 + phase);
      }
      const auto p = audio::stft_power(x, 2048, 512);
      for (std::size_t f = 0; f < p.cols(); ++f) {
        if (f * 512 < 1024 || f * 512 + 1024 > x.size()) continue;
        std::size_t best = 0;
        for (std::size_t k = 1; k < p.rows(); ++k) {
          if (p(k, f) > p(best, f)) best = k;
        }
        c.require(best == bin, "tone at bin " + std::to_string(bin) + " peaked at " + std::to_string(best) +
                                   " in frame " + std::to_string(f));
        ++checked;
      }
    }
  }
  if (c.ok) c.detail = "max relative Frobenius error " + fmt("%.2e", worst) + ", tone peaks exact in " + std::to_string(checked) + " frames";
  return c;
}

Check ac3_votes() {
  Check c;
  using cascade::AffectLabel;
  std::size_t cases = 0;
  for (double T : {0.3, 0.5, 0.7}) {
    for (unsigned len = 1; len <= 12; ++len) {
      for (unsigned mask = 0; mask < (1u << len); ++mask) {
        std::vector<AffectLabel> votes(len);
        std::vector<bool> pos(len);
        for (unsigned i = 0; i < len; ++i) {
          pos[i] = (mask >> i) & 1u;
          votes[i] = pos[i] ? AffectLabel::kPositive : AffectLabel::kNeutral;
        }
        const bool lib = cascade::decide_votes(votes, T) == AffectLabel::kPositive;
        c.require(lib == testing::brute_force_positive(pos, T),
                  "mismatch at T=" + fmt("%.1f", T) + " len " + std::to_string(len) + " mask " + std::to_string(mask));
        ++cases;
      }
    }
  }
  // pos_ratio == T decides Positive
  const std::vector<AffectLabel> half = {AffectLabel::kPositive, AffectLabel::kNeutral};
  c.require(cascade::decide_votes(half, 0.5) == AffectLabel::kPositive, "boundary 1/2 at T=0.5");
  std::vector<AffectLabel> ten(10, AffectLabel::kNeutral);
  for (int i = 0; i < 3; ++i) ten[i] = AffectLabel::kPositive;
  c.require(cascade::decide_votes(ten, 0.3) == AffectLabel::kPositive, "boundary 3/10 at T=0.3");
  for (int i = 3; i < 7; ++i) ten[i] = AffectLabel::kPositive;
  c.require(cascade::decide_votes(ten, 0.7) == AffectLabel::kPositive, "boundary 7/10 at T=0.7");
  if (c.ok) c.detail = std::to_string(cases) + " sequences agree";
  return c;
}

Check ac4_auc() {
  Check c;
  Rng rng(4242);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const auto n = static_cast<std::size_t>(rng.between(2, 200));
    const bool coarse = set % 4 == 0;
    std::vector<std::pair<double, bool>> s(n);
    for (auto& [score, pos] : s) {
      score = coarse ? std::floor(rng.uniform() * 6) / 6 : rng.uniform();
      pos = rng.uniform() < 0.35;
    }
    s[0].second = true;
    s[n - 1].second = false;
    worst = std::max(worst, std::abs(metrics::roc_auc(s) - testing::pairwise_auc(s)));
  }
  c.require(worst <= 1e-9, "max deviation " + fmt("%.3g", worst));
  if (c.ok) c.detail = "max deviation " + fmt("%.2e", worst) + " over 100 sets";
  return c;
}

Check ac5_gradient() {
  Check c;
  Rng rng(515);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double e = testing::gradient_check_trial(rng);
    c.require(e >= 0.0, "loss disagrees with the oracle in trial " + std::to_string(t));
    worst = std::max(worst, e);
  }
  c.require(worst <= 1e-4, "max relative gradient error " + fmt("%.3g", worst));
  if (c.ok) c.detail = "max relative gradient error " + fmt("%.2e", worst);
  return c;
}

Check ac6_imbalance() {
  Check c;
  std::vector<std::string> labels(134, "Negative");
  labels.insert(labels.end(), 9834, "NonNegative");
  const auto w = inference::weighted_sampler(inference::count_labels(labels));
  c.require(std::abs(134 * w.at("Negative") - 9834 * w.at("NonNegative")) <= 1e-12, "class masses differ");
  const auto sw = inference::sample_weights(labels);
  const inference::WeightedSampler sampler(sw);
  Rng rng(6);
  std::size_t neg = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) neg += labels[sampler.draw(rng)] == "Negative";
  const double freq = static_cast<double>(neg) / draws;
  c.require(std::abs(freq - 0.5) <= 0.01, "negative draw frequency " + fmt("%.4f", freq));

  Rng drng(66);
  const auto keep = inference::downsample_indices(labels, drng);
  std::size_t kn = 0, kp = 0;
  for (auto i : keep) (labels[i] == "Negative" ? kn : kp)++;
  c.require(kn == 134 && kp == 134, "downsample kept " + std::to_string(kn) + "/" + std::to_string(kp));
  if (c.ok) c.detail = "negative frequency " + fmt("%.4f", freq) + ", downsample 134/134";
  return c;
}

struct CorpusRun {
  cascade::Manifest manifest;
  metrics::CVReport report;
};

CorpusRun crossval_default(const fs::path& dir) {
  CorpusRun r;
  r.manifest = synth::gen_corpus(synth::CorpusSpec{}, dir);
  const auto cfg = cli::parse_run_config({{"seed", "1"}});
  const auto gallery = vision::load_gallery(dir / "gallery.afgal", cfg.gallery_threshold);
  std::set<std::string> ids;
  for (const auto& e : r.manifest.entries) ids.insert(e.participant_id);
  const std::vector<std::string> id_list(ids.begin(), ids.end());
  const auto folds = metrics::make_folds(id_list, 5, {});
  metrics::CrossvalOptions opts;
  opts.cascade = cfg.cascade;
  opts.f1_average = cfg.f1_average;
  opts.auc_level = cfg.auc_level;
  opts.workers = 1;
  r.report = metrics::run_crossval(r.manifest, folds, gallery, opts);
  return r;
}

Check ac7_end_to_end(const fs::path& scratch) {
  Check c;
  const auto run = crossval_default(scratch / "ac7");
  const auto& rep = run.report;
  c.require(run.manifest.entries.size() >= 60, "corpus has fewer than 60 clips");
  c.require(rep.folds.size() == 5, "expected 5 participant groups");
  c.require(rep.failures.empty(), "clip failures");
  for (const auto& f : rep.folds) c.require(!f.skipped, "fold skipped: " + f.skip_reason);
  c.require(rep.decisions.size() == run.manifest.entries.size(), "not every clip was evaluated");
  for (const auto& d : rep.decisions) c.require(cascade::cascade_exclusive(d), "exclusivity broken on " + d.clip_id);
  c.require(rep.pooled.has_value(), "no pooled metrics");
  if (!rep.pooled) return c;
  const double acc = rep.pooled->overall_metrics.accuracy;
  c.require(acc >= 0.95, "pooled accuracy " + fmt("%.2f%%", 100 * acc));
  if (c.ok) {
    c.detail = "pooled accuracy " + fmt("%.2f%%", 100 * acc) + " (" + std::to_string(rep.pooled->overall.trace()) +
               "/" + std::to_string(rep.pooled->overall.total()) + "), exclusivity holds";
  }
  return c;
}

Check ac8_determinism(const fs::path& scratch) {
  Check c;
  // two full runs from scratch, each with its own corpus
  std::vector<std::vector<std::uint8_t>> preds, corpora;
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch / ("ac8_" + std::to_string(i));
    const auto run = crossval_default(dir / "corpus");
    cascade::write_predictions(dir / "predictions.csv", run.report.decisions);
    preds.push_back(io::read_file(dir / "predictions.csv"));
    corpora.push_back(io::read_file(dir / "corpus" / "manifest.csv"));
    const auto wav = io::read_file(dir / "corpus" / "audio" / "clip_001.wav");
    corpora.back().insert(corpora.back().end(), wav.begin(), wav.end());
  }
  c.require(corpora[0] == corpora[1], "corpus generation differs between runs");
  c.require(preds[0] == preds[1], "prediction CSVs differ between runs");

  // AFMEL1: float-representable values survive exactly, re-encoding is stable
  Rng rng(8);
  Matrix m(64, 94);
  for (double& v : m.values()) v = static_cast<float>(rng.normal() * 10);
  audio::save_spectrogram(scratch / "m.afmel", m);
  const auto m2 = audio::load_spectrogram(scratch / "m.afmel");
  c.require(m2.rows() == m.rows() && m2.cols() == m.cols() && std::ranges::equal(m2.values(), m.values()), "AFMEL1 values changed");
  c.require(audio::encode_spectrogram(m2) == io::read_file(scratch / "m.afmel"), "AFMEL1 re-encoding differs");

  // AFGAL1
  const auto g = synth::synthetic_gallery(5);
  vision::save_gallery(scratch / "g.afgal", g);
  const auto g2 = vision::load_gallery(scratch / "g.afgal");
  c.require(g2.entries() == g.entries(), "AFGAL1 entries changed");
  c.require(vision::encode_gallery(g2) == io::read_file(scratch / "g.afgal"), "AFGAL1 re-encoding differs");

  // AFMDL1 with arbitrary doubles
  Matrix w(3, 64 * 94);
  for (double& v : w.values()) v = rng.normal();
  std::vector<double> b = {rng.normal(), rng.normal(), rng.normal()};
  const inference::LinearModel model({"a", "b", "c"}, {64, 94}, w, b);
  inference::save_model(scratch / "m.afmdl", model);
  const auto model2 = inference::load_model(scratch / "m.afmdl");
  c.require(model2 == model, "AFMDL1 parameters changed");
  c.require(inference::encode_model(model2) == io::read_file(scratch / "m.afmdl"), "AFMDL1 re-encoding differs");
  if (c.ok) c.detail = "prediction CSVs byte-identical (" + std::to_string(preds[0].size()) + " bytes), containers bit-exact";
  return c;
}

}  // namespace

int main() {
  const testing::TempDir scratch("acceptance");
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 metric reproduction", 1.0, ac1_metrics},
      {"AC2 DSP oracle", 30.0, ac2_dsp},
      {"AC3 vote rule equivalence", 5.0, ac3_votes},
      {"AC4 ROC-AUC oracle", 10.0, ac4_auc},
      {"AC5 gradient check", 10.0, ac5_gradient},
      {"AC6 imbalance", 5.0, ac6_imbalance},
      {"AC7 end-to-end synthetic", 120.0, [&] { return ac7_end_to_end(scratch.path()); }},
      {"AC8 determinism and formats", 1e9, [&] { return ac8_determinism(scratch.path()); }},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < cr.budget_s;
    const bool pass = c.ok && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %s: %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", cr.name, c.detail.c_str(), s,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
