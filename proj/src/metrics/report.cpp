#include "affect/metrics/report.hpp"

#include <algorithm>
#include <sstream>

#include "affect/core/error.hpp"

namespace affect::metrics {

using cascade::AffectLabel;
using cascade::PredictionRecord;

namespace {

std::vector<std::string> names(std::initializer_list<std::string_view> v) {
  return std::vector<std::string>(v.begin(), v.end());
}

std::string percent(double v) { return format_fixed(100.0 * v, 2) + "%"; }

bool both_classes(const std::vector<std::pair<double, bool>>& s) {
  const bool any_pos = std::any_of(s.begin(), s.end(), [](const auto& p) { return p.second; });
  const bool any_neg = std::any_of(s.begin(), s.end(), [](const auto& p) { return !p.second; });
  return any_pos && any_neg;
}

void put_metrics(KeyValues& kv, const std::string& prefix, const ConfusionMatrix& cm, const MetricsReport& m) {
  kv[prefix + ".total"] = std::to_string(m.total);
  kv[prefix + ".correct"] = std::to_string(cm.trace());
  kv[prefix + ".accuracy"] = format_fixed(m.accuracy);
  kv[prefix + ".f1"] = format_fixed(m.f1);
  for (std::size_t c = 0; c < m.class_order.size(); ++c) {
    if (m.recall[c]) kv[prefix + ".recall." + m.class_order[c]] = format_fixed(*m.recall[c]);
    if (m.precision[c]) kv[prefix + ".precision." + m.class_order[c]] = format_fixed(*m.precision[c]);
  }
  if (m.g_mean) kv[prefix + ".g_mean"] = format_fixed(*m.g_mean);
  if (m.roc_auc) kv[prefix + ".roc_auc"] = format_fixed(*m.roc_auc);
}

void print_metrics(std::ostream& os, std::string_view title, const ConfusionMatrix& cm, const MetricsReport& m) {
  os << title << " accuracy: " << percent(m.accuracy) << " (" << cm.trace() << "/" << m.total << ")\n";
  os << title << " recall:";
  for (std::size_t c = 0; c < m.class_order.size(); ++c) {
    os << (c ? ", " : " ") << m.class_order[c] << " " << (m.recall[c] ? percent(*m.recall[c]) : "n/a");
  }
  os << "\n" << title << " F1 (" << to_string(m.f1_average) << "): " << format_fixed(m.f1, 4) << "\n";
  if (m.g_mean) os << title << " G-mean: " << format_fixed(*m.g_mean, 4) << "\n";
  if (m.roc_auc) os << title << " ROC-AUC: " << format_fixed(*m.roc_auc, 4) << "\n";
}

}  // namespace

std::string_view to_string(AucLevel level) { return level == AucLevel::kClip ? "clip" : "segment"; }

AucLevel parse_auc_level(std::string_view text) {
  if (text == "clip") return AucLevel::kClip;
  if (text == "segment") return AucLevel::kSegment;
  throw ConfigError("auc level must be clip or segment, got '" + std::string(text) + "'");
}

EvaluationReport evaluate(std::span<const PredictionRecord> records, F1Average average) {
  if (records.empty()) throw DataError("no predictions to evaluate");
  std::vector<std::pair<std::string, std::string>> overall, stage1, stage2;
  std::vector<std::pair<double, bool>> s1_scores, s2_scores;
  for (const auto& r : records) {
    if (!r.truth) throw DataError("clip " + r.clip_id + " has no true label");
    const AffectLabel t = *r.truth;
    overall.emplace_back(to_string(t), to_string(r.pred));
    const bool pred_neg = r.pred == AffectLabel::kNegative;
    stage1.emplace_back(cascade::stage1_class(t), pred_neg ? cascade::kNegative : cascade::kNonNegative);
    s1_scores.emplace_back(r.stage1_neg_ratio, t == AffectLabel::kNegative);
    if (!pred_neg && t != AffectLabel::kNegative) {
      stage2.emplace_back(to_string(t), to_string(r.pred));
      if (r.stage2_pos_ratio) s2_scores.emplace_back(*r.stage2_pos_ratio, t == AffectLabel::kPositive);
    }
  }
  EvaluationReport rep;
  rep.overall = confusion_matrix(overall, names({cascade::kNegative, cascade::kNeutral, cascade::kPositive}));
  rep.stage1 = confusion_matrix(stage1, names({cascade::kNegative, cascade::kNonNegative}));
  rep.stage2 = confusion_matrix(stage2, names({cascade::kPositive, cascade::kNeutral}));
  rep.overall_metrics = summarize(rep.overall, average == F1Average::kBinary ? F1Average::kWeighted : average);
  rep.stage1_metrics = summarize(rep.stage1, average);
  if (both_classes(s1_scores)) rep.stage1_metrics.roc_auc = roc_auc(s1_scores);
  if (rep.stage2.total() > 0) {
    rep.stage2_metrics = summarize(rep.stage2, average);
    if (s2_scores.size() == stage2.size() && both_classes(s2_scores)) rep.stage2_metrics->roc_auc = roc_auc(s2_scores);
  }
  return rep;
}

EvaluationReport evaluate(std::span<const cascade::ClipDecision> decisions, F1Average average, AucLevel level) {
  const auto records = cascade::to_records(decisions);
  auto rep = evaluate(records, average);
  if (level == AucLevel::kSegment) {
    std::vector<std::pair<double, bool>> seg;
    for (const auto& d : decisions) {
      for (double p : d.stage1.segment_neg_probs) seg.emplace_back(p, *d.truth == AffectLabel::kNegative);
    }
    rep.stage1_metrics.roc_auc.reset();
    if (both_classes(seg)) rep.stage1_metrics.roc_auc = roc_auc(seg);
  }
  return rep;
}

KeyValues metric_values(const EvaluationReport& r) {
  KeyValues kv;
  put_metrics(kv, "overall", r.overall, r.overall_metrics);
  put_metrics(kv, "stage1", r.stage1, r.stage1_metrics);
  if (r.stage2_metrics) put_metrics(kv, "stage2", r.stage2, *r.stage2_metrics);
  return kv;
}

std::string format_confusion(const ConfusionMatrix& cm, std::string_view title) {
  std::size_t w = 4;
  for (const auto& l : cm.class_order) w = std::max(w, l.size());
  for (const auto& row : cm.counts) {
    for (auto v : row) w = std::max(w, std::to_string(v).size());
  }
  auto pad = [w](const std::string& s) { return std::string(w - s.size(), ' ') + s; };
  std::ostringstream os;
  os << title << " (rows: true, columns: predicted)\n" << pad("");
  for (const auto& l : cm.class_order) os << "  " << pad(l);
  os << "\n";
  for (std::size_t i = 0; i < cm.size(); ++i) {
    os << pad(cm.class_order[i]);
    for (auto v : cm.counts[i]) os << "  " << pad(std::to_string(v));
    os << "\n";
  }
  return os.str();
}

std::string format_report(const EvaluationReport& r) {
  std::ostringstream os;
  print_metrics(os, "overall", r.overall, r.overall_metrics);
  print_metrics(os, "stage 1", r.stage1, r.stage1_metrics);
  if (r.stage2_metrics) {
    print_metrics(os, "stage 2", r.stage2, *r.stage2_metrics);
  } else {
    os << "stage 2: no Neutral or Positive clips reached it\n";
  }
  os << "\n" << format_confusion(r.overall, "overall");
  os << "\n" << format_confusion(r.stage1, "stage 1");
  os << "\n" << format_confusion(r.stage2, "stage 2");
  return os.str();
}

std::vector<ParticipantTransitions> per_participant_report(std::span<const PredictionRecord> records,
                                                           TransitionLevel level) {
  auto tag = [level](AffectLabel l) -> std::string {
    if (level == TransitionLevel::kStage1) return l == AffectLabel::kNegative ? "neg" : "non-neg";
    return std::string(cascade::short_name(l));
  };
  std::map<std::string, std::map<std::string, long long>> counts;
  std::map<std::string, long long> totals;
  for (const auto& r : records) {
    if (!r.truth) throw DataError("clip " + r.clip_id + " has no true label");
    ++counts[r.participant_id][tag(*r.truth) + "_to_" + tag(r.pred)];
    ++totals[r.participant_id];
  }
  std::vector<ParticipantTransitions> out;
  for (const auto& [pid, trans] : counts) {
    ParticipantTransitions p;
    p.participant_id = pid;
    p.clips = totals[pid];
    for (const auto& [name, n] : trans) p.fractions[name] = static_cast<double>(n) / static_cast<double>(p.clips);
    out.push_back(std::move(p));
  }
  return out;
}

CsvTable transitions_table(std::span<const ParticipantTransitions> stage1,
                           std::span<const ParticipantTransitions> cascade) {
  CsvTable t;
  t.header = {"participant_id", "level", "clips", "transition", "fraction"};
  auto add = [&t](std::span<const ParticipantTransitions> rows, const std::string& level) {
    for (const auto& p : rows) {
      for (const auto& [name, f] : p.fractions) {
        t.rows.push_back({p.participant_id, level, std::to_string(p.clips), name, format_fixed(f)});
      }
    }
  };
  add(stage1, "stage1");
  add(cascade, "cascade");
  return t;
}

}  // namespace affect::metrics
