#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/vision/types.hpp"

namespace affect::vision {

inline constexpr double kDefaultGalleryThreshold = 0.4;

// dot(a, b) / (|a| |b|), accumulated in double. Throws ShapeError on a
// dimension mismatch and DataError on a zero-norm operand.
double cosine_similarity(const FaceEmbedding& a, const FaceEmbedding& b);

struct GalleryEntry {
  std::string identity;
  FaceEmbedding embedding;

  bool operator==(const GalleryEntry&) const = default;
};

// Known target faces. A probe matches when its cosine distance
// (1 - similarity) to the nearest entry is below the threshold.
class FaceGallery {
 public:
  explicit FaceGallery(double threshold = kDefaultGalleryThreshold);

  void add(std::string identity, FaceEmbedding embedding);

  const std::vector<GalleryEntry>& entries() const { return entries_; }
  double threshold() const { return threshold_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Same entries, different threshold.
  FaceGallery with_threshold(double threshold) const;

 private:
  double threshold_;
  std::vector<GalleryEntry> entries_;
};

struct GalleryMatch {
  std::string identity;
  double distance = 0.0;
};

// Nearest entry by cosine distance; ties go to the earliest entry. Returns
// nullopt when that distance is not below the threshold. Throws
// ConfigError for an empty gallery.
std::optional<GalleryMatch> match_gallery(const FaceEmbedding& e, const FaceGallery& g);

// AFGAL1 container. The threshold is not stored.
std::vector<std::uint8_t> encode_gallery(const FaceGallery& g);
FaceGallery decode_gallery(std::span<const std::uint8_t> bytes, double threshold = kDefaultGalleryThreshold);
void save_gallery(const std::filesystem::path& path, const FaceGallery& g);
FaceGallery load_gallery(const std::filesystem::path& path, double threshold = kDefaultGalleryThreshold);

}  // namespace affect::vision
