#include "affect/cascade/labels.hpp"

#include <algorithm>
#include <cctype>

#include "affect/core/error.hpp"

namespace affect::cascade {

std::string_view to_string(AffectLabel label) {
  switch (label) {
    case AffectLabel::kNegative:
      return kNegative;
    case AffectLabel::kNeutral:
      return kNeutral;
    case AffectLabel::kPositive:
      return kPositive;
  }
  return "?";
}

AffectLabel parse_affect_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "negative") return AffectLabel::kNegative;
  if (lower == "neutral") return AffectLabel::kNeutral;
  if (lower == "positive") return AffectLabel::kPositive;
  throw DataError("unknown affect label '" + std::string(text) + "'");
}

std::string_view short_name(AffectLabel label) {
  switch (label) {
    case AffectLabel::kNegative:
      return "neg";
    case AffectLabel::kNeutral:
      return "neu";
    case AffectLabel::kPositive:
      return "pos";
  }
  return "?";
}

}  // namespace affect::cascade
