#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/core/random.hpp"
#include "affect/metrics/crossval.hpp"
#include "affect/metrics/metrics.hpp"
#include "affect/metrics/report.hpp"
#include "affect/synth/corpus.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace affect;
using namespace affect::metrics;
using cascade::AffectLabel;
using cascade::PredictionRecord;

namespace {

const std::vector<std::string> kStage1 = {"Negative", "NonNegative"};
const std::vector<std::string> kThree = {"Negative", "Neutral", "Positive"};

// Hand arithmetic for one class of a confusion matrix.
struct ClassOracle {
  double recall, precision, f1;
};

ClassOracle class_oracle(const std::vector<std::vector<long long>>& m, std::size_t c) {
  double row = 0, col = 0;
  for (std::size_t j = 0; j < m.size(); ++j) row += static_cast<double>(m[c][j]);
  for (std::size_t i = 0; i < m.size(); ++i) col += static_cast<double>(m[i][c]);
  const double tp = static_cast<double>(m[c][c]);
  const double r = row > 0 ? tp / row : 0.0, p = col > 0 ? tp / col : 0.0;
  return {r, p, (p + r) > 0 ? 2 * p * r / (p + r) : 0.0};
}

PredictionRecord record(std::string pid, AffectLabel truth, AffectLabel pred, double neg_ratio = 0.0) {
  PredictionRecord r;
  r.clip_id = pid + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(&r) % 100000);
  r.participant_id = std::move(pid);
  r.truth = truth;
  r.pred = pred;
  r.stage1_neg_ratio = neg_ratio;
  return r;
}

std::vector<PredictionRecord> published_overall_records() {
  // diagonal 285/43/13 of 471; errors spread over the other columns
  std::vector<PredictionRecord> out;
  auto add = [&](AffectLabel t, AffectLabel p, int n) {
    for (int i = 0; i < n; ++i) out.push_back(record("p1", t, p));
  };
  add(AffectLabel::kNeutral, AffectLabel::kNeutral, 285);
  add(AffectLabel::kNeutral, AffectLabel::kPositive, 82);
  add(AffectLabel::kNeutral, AffectLabel::kNegative, 17);
  add(AffectLabel::kPositive, AffectLabel::kPositive, 43);
  add(AffectLabel::kPositive, AffectLabel::kNeutral, 22);
  add(AffectLabel::kPositive, AffectLabel::kNegative, 3);
  add(AffectLabel::kNegative, AffectLabel::kNegative, 13);
  add(AffectLabel::kNegative, AffectLabel::kNeutral, 6);
  return out;
}

}  // namespace

TEST_CASE("confusion matrix construction") {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 384; ++i) pairs.emplace_back("Neutral", "Neutral");
  for (int i = 0; i < 68; ++i) pairs.emplace_back("Positive", "Positive");
  for (int i = 0; i < 19; ++i) pairs.emplace_back("Negative", "Negative");
  const auto cm = confusion_matrix(pairs, kThree);
  CHECK(cm.counts == std::vector<std::vector<long long>>{{19, 0, 0}, {0, 384, 0}, {0, 0, 68}});
  CHECK(cm.total() == 471);
  CHECK(cm.trace() == 471);

  const auto empty = confusion_matrix({}, kThree);
  CHECK(empty.total() == 0);
  CHECK(empty.counts == std::vector<std::vector<long long>>(3, std::vector<long long>(3, 0)));

  const std::vector<std::pair<std::string, std::string>> bad = {{"Neutral", "Happy"}};
  CHECK_THROWS_AS(confusion_matrix(bad, kThree), DataError);
  CHECK_THROWS_AS(empty_confusion({"a", "a"}), DataError);
  CHECK_THROWS_AS(confusion_from_counts(kStage1, {{1, 2}, {3}}), DataError);
  CHECK_THROWS_AS(confusion_from_counts(kStage1, {{1, -2}, {3, 4}}), DataError);
}

TEST_CASE("confusion conservation") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, std::string>> pairs;
    const auto n = rng.below(200);
    for (std::uint64_t i = 0; i < n; ++i) pairs.emplace_back(kThree[rng.below(3)], kThree[rng.below(3)]);
    const auto cm = confusion_matrix(pairs, kThree);
    long long off = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) off += i == j ? 0 : cm.counts[i][j];
    }
    CHECK(cm.trace() + off == static_cast<long long>(n));
  }
}

TEST_CASE("reconstructed stage-1 matrix") {
  const std::vector<std::vector<long long>> m = {{13, 6}, {20, 432}};
  const auto r = summarize(confusion_from_counts(kStage1, m));
  CHECK(r.accuracy == doctest::Approx(445.0 / 471.0).epsilon(1e-12));
  CHECK(std::abs(100 * r.accuracy - 94.48) <= 0.01);
  CHECK(std::abs(100 * *r.recall[0] - 68.42) <= 0.01);
  CHECK(std::abs(100 * *r.recall[1] - 95.57) <= 0.01);
  const auto neg = class_oracle(m, 0), non = class_oracle(m, 1);
  CHECK(r.f1 == doctest::Approx((19 * neg.f1 + 452 * non.f1) / 471.0).epsilon(1e-12));
  REQUIRE(r.g_mean.has_value());
  CHECK(*r.g_mean == doctest::Approx(std::sqrt(13.0 / 19.0 * 432.0 / 452.0)).epsilon(1e-12));
  CHECK(*r.g_mean == doctest::Approx(0.8087).epsilon(1e-4));

  CHECK(summarize(confusion_from_counts(kStage1, m), F1Average::kBinary).f1 == doctest::Approx(neg.f1));
  CHECK(summarize(confusion_from_counts(kStage1, m), F1Average::kMacro).f1 ==
        doctest::Approx((neg.f1 + non.f1) / 2));
}

TEST_CASE("overall and stage-2 figures") {
  const auto rep = evaluate(published_overall_records());
  CHECK(rep.overall.total() == 471);
  CHECK(rep.overall.trace() == 341);
  CHECK(std::abs(100 * rep.overall_metrics.accuracy - 72.40) <= 0.01);
  REQUIRE(rep.stage2_metrics.has_value());
  CHECK(*rep.stage2_metrics->recall_of("Positive") == doctest::Approx(43.0 / 65.0));
  CHECK(format_report(rep).find("overall accuracy: 72.40% (341/471)") != std::string::npos);

  const auto s2 = summarize(confusion_from_counts({"Positive", "Neutral"}, {{43, 25}, {82, 302}}));
  CHECK(std::abs(100 * *s2.recall_of("Positive") - 63.24) <= 0.01);
}

TEST_CASE("summarize contracts") {
  CHECK_THROWS_AS(summarize(empty_confusion(kThree)), DataError);
  CHECK_THROWS_AS(summarize(confusion_from_counts(kThree, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), F1Average::kBinary),
                  ConfigError);
  const auto r = summarize(confusion_from_counts(kStage1, {{0, 0}, {3, 5}}));
  CHECK_FALSE(r.recall[0].has_value());
  CHECK(*r.recall[1] == doctest::Approx(5.0 / 8.0));
  CHECK_FALSE(r.g_mean.has_value());
  CHECK_FALSE(summarize(confusion_from_counts(kThree, {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}})).g_mean.has_value());
  CHECK(parse_f1_average("macro") == F1Average::kMacro);
  CHECK_THROWS_AS(parse_f1_average("micro"), ConfigError);
}

TEST_CASE("summary values stay in range and G-mean between recalls") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<long long>> m(2, std::vector<long long>(2));
    for (auto& row : m) {
      for (auto& v : row) v = static_cast<long long>(rng.below(50));
    }
    m[0][0] += 1;
    m[1][1] += 1;
    for (auto avg : {F1Average::kWeighted, F1Average::kMacro, F1Average::kBinary}) {
      const auto r = summarize(confusion_from_counts(kStage1, m), avg);
      CHECK(r.accuracy >= 0.0);
      CHECK(r.accuracy <= 1.0);
      CHECK(r.f1 >= 0.0);
      CHECK(r.f1 <= 1.0);
      REQUIRE(r.g_mean.has_value());
      CHECK(*r.g_mean >= std::min(*r.recall[0], *r.recall[1]) - 1e-15);
      CHECK(*r.g_mean <= std::max(*r.recall[0], *r.recall[1]) + 1e-15);
      for (std::size_t c = 0; c < 2; ++c) {
        const auto o = class_oracle(m, c);
        CHECK(r.class_f1[c] == doctest::Approx(o.f1).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ROC-AUC closed forms") {
  const std::vector<std::pair<double, bool>> sep = {{0.9, true}, {0.8, true}, {0.3, false}, {0.1, false}};
  CHECK(roc_auc(sep) == 1.0);
  const std::vector<std::pair<double, bool>> ties = {{0.5, true}, {0.5, false}, {0.5, false}, {0.5, true}};
  CHECK(roc_auc(ties) == 0.5);
  const std::vector<std::pair<double, bool>> one = {{0.5, true}, {0.2, true}};
  CHECK_THROWS_AS(roc_auc(one), DataError);
  const std::vector<std::pair<double, bool>> nan = {{std::nan(""), true}, {0.2, false}};
  CHECK_THROWS_AS(roc_auc(nan), DataError);
}

TEST_CASE("ROC-AUC matches the pairwise oracle") {
  Rng rng(77);
  for (int set = 0; set < 100; ++set) {
    const auto n = static_cast<std::size_t>(rng.between(2, 200));
    const bool coarse = set % 3 == 0;  // many ties
    std::vector<std::pair<double, bool>> s(n);
    for (auto& [score, pos] : s) {
      score = coarse ? std::floor(rng.uniform() * 5) / 5 : rng.uniform();
      pos = rng.uniform() < 0.4;
    }
    s[0].second = true;
    s[1].second = false;
    CHECK(std::abs(roc_auc(s) - testing::pairwise_auc(s)) <= 1e-9);
    if (!coarse) {
      auto flipped = s;
      for (auto& p : flipped) p.first = -p.first;
      CHECK(roc_auc(s) + roc_auc(flipped) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-participant transitions") {
  std::vector<PredictionRecord> all_right = {record("p1", AffectLabel::kNeutral, AffectLabel::kNeutral),
                                             record("p1", AffectLabel::kNeutral, AffectLabel::kNeutral)};
  auto rep = per_participant_report(all_right);
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].fractions == std::map<std::string, double>{{"neu_to_neu", 1.0}});

  std::vector<PredictionRecord> four = {record("p2", AffectLabel::kNeutral, AffectLabel::kNeutral),
                                        record("p2", AffectLabel::kNeutral, AffectLabel::kNeutral),
                                        record("p2", AffectLabel::kNeutral, AffectLabel::kPositive),
                                        record("p2", AffectLabel::kNeutral, AffectLabel::kNeutral)};
  rep = per_participant_report(four);
  CHECK(rep[0].fractions.at("neu_to_neu") == 0.75);
  CHECK(rep[0].fractions.at("neu_to_pos") == 0.25);

  std::vector<PredictionRecord> s1 = {record("a", AffectLabel::kNegative, AffectLabel::kNeutral),
                                      record("a", AffectLabel::kNegative, AffectLabel::kNegative),
                                      record("b", AffectLabel::kPositive, AffectLabel::kNeutral)};
  rep = per_participant_report(s1, TransitionLevel::kStage1);
  REQUIRE(rep.size() == 2);
  CHECK(rep[0].fractions.at("neg_to_non-neg") == 0.5);
  CHECK(rep[0].fractions.at("neg_to_neg") == 0.5);
  CHECK(rep[1].fractions.at("non-neg_to_non-neg") == 1.0);

  Rng rng(5);
  std::vector<PredictionRecord> many;
  for (int i = 0; i < 300; ++i) {
    many.push_back(record("p" + std::to_string(rng.below(7)), cascade::kAllLabels[rng.below(3)],
                          cascade::kAllLabels[rng.below(3)]));
  }
  for (auto level : {TransitionLevel::kStage1, TransitionLevel::kCascade}) {
    for (const auto& p : per_participant_report(many, level)) {
      double sum = 0.0;
      for (const auto& [k, v] : p.fractions) sum += v;
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("grouped folds") {
  const std::vector<std::string> ids = {"p1", "p2", "p3", "p4", "p5", "p6", "p2", "p5"};
  const std::vector<ParticipantGroup> merge = {{"p5", "p6"}};
  const auto folds = make_folds(ids, 5, merge);
  REQUIRE(folds.size() == 5);
  ParticipantGroup seen;
  for (const auto& f : folds) {
    for (const auto& p : f.held_out) {
      CHECK(seen.insert(p).second);
      CHECK_FALSE(f.train.count(p));
    }
    CHECK(f.held_out.size() + f.train.size() == 6);
  }
  CHECK(seen == ParticipantGroup{"p1", "p2", "p3", "p4", "p5", "p6"});
  CHECK(folds[4].held_out == ParticipantGroup{"p5", "p6"});

  CHECK_THROWS_AS(make_folds(ids, 1, merge), ConfigError);
  CHECK_THROWS_AS(make_folds(ids, 5), ConfigError);
  CHECK(make_folds(ids, 6).size() == 6);
  const std::vector<ParticipantGroup> unknown = {{"p5", "p9"}};
  CHECK_THROWS_AS(make_folds(ids, 5, unknown), ConfigError);
  const std::vector<ParticipantGroup> overlap = {{"p1", "p2"}, {"p2", "p3"}};
  CHECK_THROWS_AS(make_folds(ids, 4, overlap), ConfigError);

  CHECK(parse_merge("p5+p6") == std::vector<ParticipantGroup>{{"p5", "p6"}});
  CHECK(parse_merge("a+b, c+d").size() == 2);
  CHECK(parse_merge("").empty());
  CHECK_THROWS_AS(parse_merge("p5"), ConfigError);
  CHECK_THROWS_AS(parse_merge("p5+"), ConfigError);
}

TEST_CASE("cross-validation on a synthetic corpus") {
  testing::TempDir dir("cv");
  synth::CorpusSpec spec;  // defaults: 60 clips, 5 participants
  spec.seed = 3;
  const auto manifest = synth::gen_corpus(spec, dir / "corpus");
  const auto gallery = vision::load_gallery(dir / "corpus" / "gallery.afgal");
  std::vector<std::string> ids;
  for (const auto& e : manifest.entries) ids.push_back(e.participant_id);
  const auto folds = make_folds(ids, 5);

  CrossvalOptions opts;
  const auto rep = run_crossval(manifest, folds, gallery, opts);
  REQUIRE(rep.pooled.has_value());
  CHECK(rep.failures.empty());
  CHECK(rep.skipped_clips == 0);
  CHECK(rep.decisions.size() == 60);
  CHECK(rep.pooled->overall.total() == 60);
  CHECK(rep.pooled->overall_metrics.accuracy >= 0.95);
  for (const auto& d : rep.decisions) CHECK(cascade::cascade_exclusive(d));
  for (std::size_t i = 0; i < rep.decisions.size(); ++i) CHECK(rep.decisions[i].clip_id == manifest.entries[i].clip_id);

  opts.workers = 3;
  const auto again = run_crossval(manifest, folds, gallery, opts);
  write_cv_report(dir / "r1", rep);
  write_cv_report(dir / "r2", again);
  for (const char* f : {"predictions.csv", "pooled_metrics.csv", "fold_metrics.csv", "participant_transitions.csv",
                        "confusion.txt", "summary.txt"}) {
    CHECK(io::read_text(dir / "r1" / f) == io::read_text(dir / "r2" / f));
  }
  const auto summary = read_key_values(dir / "r1" / "summary.txt");
  CHECK(summary.at("clips_evaluated") == "60");
  CHECK(summary.at("folds_skipped") == "0");

  opts.workers = 1;
  opts.auc_level = AucLevel::kSegment;
  const auto seg = run_crossval(manifest, folds, gallery, opts);
  CHECK(seg.pooled->stage1_metrics.roc_auc.has_value());

  // all Negative clips moved to p1: the fold holding p1 out has no Negative
  // training data and is skipped
  auto skewed = manifest;
  std::size_t p1_clips = 0;
  for (auto& e : skewed.entries) {
    if (e.label == AffectLabel::kNegative) e.participant_id = "p1";
    p1_clips += e.participant_id == "p1" ? 1 : 0;
  }
  const auto sk = run_crossval(skewed, folds, gallery, opts);
  REQUIRE(sk.folds.size() == 5);
  CHECK(sk.folds[0].skipped);
  CHECK(sk.folds[0].skip_reason.find("Negative") != std::string::npos);
  CHECK(sk.skipped_clips == p1_clips);
  CHECK(sk.pooled->overall.total() == static_cast<long long>(60 - sk.skipped_clips));
}
