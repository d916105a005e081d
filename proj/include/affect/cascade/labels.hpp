#pragma once

#include <array>
#include <string>
#include <string_view>

namespace affect::cascade {

enum class AffectLabel { kNegative, kNeutral, kPositive };

inline constexpr std::array<AffectLabel, 3> kAllLabels = {AffectLabel::kNegative, AffectLabel::kNeutral,
                                                          AffectLabel::kPositive};

// Class names used by the two binary classifiers and all outputs.
inline constexpr std::string_view kNegative = "Negative";
inline constexpr std::string_view kNonNegative = "NonNegative";
inline constexpr std::string_view kNeutral = "Neutral";
inline constexpr std::string_view kPositive = "Positive";

std::string_view to_string(AffectLabel label);
// Accepts the names above, case-insensitively. Throws DataError otherwise.
AffectLabel parse_affect_label(std::string_view text);

// Stage-1 target for a clip label.
inline std::string_view stage1_class(AffectLabel l) { return l == AffectLabel::kNegative ? kNegative : kNonNegative; }

// Short tag used in transition names such as neg_to_non-neg.
std::string_view short_name(AffectLabel label);

}  // namespace affect::cascade
