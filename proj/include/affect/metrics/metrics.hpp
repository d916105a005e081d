#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace affect::metrics {

// Square count matrix indexed [true][predicted].
struct ConfusionMatrix {
  std::vector<std::string> class_order;
  std::vector<std::vector<long long>> counts;

  std::size_t size() const { return class_order.size(); }
  // Throws DataError for a label outside class_order.
  std::size_t index_of(std::string_view label) const;
  long long at(std::string_view truth, std::string_view pred) const;
  long long total() const;
  long long trace() const;
  long long row_total(std::size_t i) const;
  long long col_total(std::size_t j) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Zero matrix over `order`. Labels must be unique and non-empty.
ConfusionMatrix empty_confusion(std::vector<std::string> order);

// Validates shape and signs (DataError).
ConfusionMatrix confusion_from_counts(std::vector<std::string> order, std::vector<std::vector<long long>> counts);

// Throws DataError for labels outside `order`.
ConfusionMatrix confusion_matrix(std::span<const std::pair<std::string, std::string>> pairs,
                                 std::vector<std::string> order);

// Element-wise sum; class orders must agree.
ConfusionMatrix operator+(const ConfusionMatrix& a, const ConfusionMatrix& b);

enum class F1Average { kWeighted, kMacro, kBinary };

std::string_view to_string(F1Average a);
F1Average parse_f1_average(std::string_view text);

struct MetricsReport {
  std::vector<std::string> class_order;
  long long total = 0;
  double accuracy = 0.0;
  // nullopt where the class has no true (recall) or predicted (precision)
  // examples.
  std::vector<std::optional<double>> recall;
  std::vector<std::optional<double>> precision;
  std::vector<double> class_f1;  // 0 where undefined
  F1Average f1_average = F1Average::kWeighted;
  double f1 = 0.0;
  // Binary matrices only, and only when both recalls are defined.
  std::optional<double> g_mean;
  std::optional<double> roc_auc;

  std::optional<double> recall_of(std::string_view label) const;
};

// weighted: support-weighted mean of per-class F1
// macro:    plain mean over classes with support
// binary:   F1 of class_order[0]
// Throws DataError for an all-zero matrix, ConfigError for binary
// averaging on a non-binary matrix.
MetricsReport summarize(const ConfusionMatrix& cm, F1Average average = F1Average::kWeighted);

// Area under the ROC curve from (score, is_positive) pairs; tied scores
// are one step of the curve, so ties count one half. Throws DataError
// unless both classes occur and all scores are finite.
double roc_auc(std::span<const std::pair<double, bool>> scored);

}  // namespace affect::metrics
