#include "affect/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "affect/core/error.hpp"

namespace affect::metrics {

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
  const auto it = std::find(class_order.begin(), class_order.end(), label);
  if (it == class_order.end()) throw DataError("label '" + std::string(label) + "' is not in the class order");
  return static_cast<std::size_t>(it - class_order.begin());
}

long long ConfusionMatrix::at(std::string_view truth, std::string_view pred) const {
  return counts[index_of(truth)][index_of(pred)];
}

long long ConfusionMatrix::total() const {
  long long t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

long long ConfusionMatrix::trace() const {
  long long t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

long long ConfusionMatrix::row_total(std::size_t i) const {
  long long t = 0;
  for (auto v : counts.at(i)) t += v;
  return t;
}

long long ConfusionMatrix::col_total(std::size_t j) const {
  long long t = 0;
  for (const auto& row : counts) t += row.at(j);
  return t;
}

ConfusionMatrix empty_confusion(std::vector<std::string> order) {
  if (order.empty()) throw DataError("confusion matrix needs at least one class");
  std::set<std::string> seen;
  for (const auto& l : order) {
    if (l.empty() || !seen.insert(l).second) throw DataError("class labels must be unique and non-empty");
  }
  ConfusionMatrix cm;
  cm.counts.assign(order.size(), std::vector<long long>(order.size(), 0));
  cm.class_order = std::move(order);
  return cm;
}

ConfusionMatrix confusion_from_counts(std::vector<std::string> order, std::vector<std::vector<long long>> counts) {
  auto cm = empty_confusion(std::move(order));
  if (counts.size() != cm.size()) throw DataError("confusion counts must be square over the class order");
  for (const auto& row : counts) {
    if (row.size() != cm.size()) throw DataError("confusion counts must be square over the class order");
    for (auto v : row) {
      if (v < 0) throw DataError("confusion counts must be non-negative");
    }
  }
  cm.counts = std::move(counts);
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::pair<std::string, std::string>> pairs,
                                 std::vector<std::string> order) {
  auto cm = empty_confusion(std::move(order));
  for (const auto& [t, p] : pairs) ++cm.counts[cm.index_of(t)][cm.index_of(p)];
  return cm;
}

ConfusionMatrix operator+(const ConfusionMatrix& a, const ConfusionMatrix& b) {
  if (a.class_order != b.class_order) throw DataError("cannot add confusion matrices over different classes");
  auto out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) out.counts[i][j] += b.counts[i][j];
  }
  return out;
}

std::string_view to_string(F1Average a) {
  switch (a) {
    case F1Average::kWeighted:
      return "weighted";
    case F1Average::kMacro:
      return "macro";
    case F1Average::kBinary:
      return "binary";
  }
  return "?";
}

F1Average parse_f1_average(std::string_view text) {
  if (text == "weighted") return F1Average::kWeighted;
  if (text == "macro") return F1Average::kMacro;
  if (text == "binary") return F1Average::kBinary;
  throw ConfigError("f1_average must be weighted, macro or binary, got '" + std::string(text) + "'");
}

std::optional<double> MetricsReport::recall_of(std::string_view label) const {
  const auto it = std::find(class_order.begin(), class_order.end(), label);
  if (it == class_order.end()) throw ConfigError("no class '" + std::string(label) + "' in report");
  return recall[static_cast<std::size_t>(it - class_order.begin())];
}

MetricsReport summarize(const ConfusionMatrix& cm, F1Average average) {
  const long long total = cm.total();
  if (total <= 0) throw DataError("cannot summarize an empty confusion matrix");
  if (average == F1Average::kBinary && cm.size() != 2) {
    throw ConfigError("binary F1 needs a 2-class confusion matrix");
  }
  const std::size_t k = cm.size();
  MetricsReport r;
  r.class_order = cm.class_order;
  r.total = total;
  r.f1_average = average;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  r.recall.resize(k);
  r.precision.resize(k);
  r.class_f1.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm.counts[c][c]);
    const long long support = cm.row_total(c);
    const long long predicted = cm.col_total(c);
    if (support > 0) r.recall[c] = tp / static_cast<double>(support);
    if (predicted > 0) r.precision[c] = tp / static_cast<double>(predicted);
    // 2TP / (2TP + FP + FN) equals 2PR/(P+R) and stays defined when one of them is not.
    const double denom = static_cast<double>(support + predicted);
    if (denom > 0.0) r.class_f1[c] = 2.0 * tp / denom;
  }
  switch (average) {
    case F1Average::kWeighted: {
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += static_cast<double>(cm.row_total(c)) * r.class_f1[c];
      r.f1 = s / static_cast<double>(total);
      break;
    }
    case F1Average::kMacro: {
      double s = 0.0;
      std::size_t n = 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (cm.row_total(c) == 0) continue;
        s += r.class_f1[c];
        ++n;
      }
      r.f1 = s / static_cast<double>(n);
      break;
    }
    case F1Average::kBinary:
      r.f1 = r.class_f1[0];
      break;
  }
  if (k == 2 && r.recall[0] && r.recall[1]) r.g_mean = std::sqrt(*r.recall[0] * *r.recall[1]);
  return r;
}

double roc_auc(std::span<const std::pair<double, bool>> scored) {
  std::vector<std::pair<double, bool>> items(scored.begin(), scored.end());
  double n_pos = 0.0, n_neg = 0.0;
  for (const auto& [s, pos] : items) {
    if (!std::isfinite(s)) throw DataError("ROC-AUC scores must be finite");
    (pos ? n_pos : n_neg) += 1.0;
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("ROC-AUC needs both positive and negative examples");
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // Walk thresholds from high to low; each distinct score is one ROC point.
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    double dtp = 0.0, dfp = 0.0;
    std::size_t j = i;
    for (; j < items.size() && items[j].first == items[i].first; ++j) (items[j].second ? dtp : dfp) += 1.0;
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
    i = j;
  }
  return area / (n_pos * n_neg);
}

}  // namespace affect::metrics
