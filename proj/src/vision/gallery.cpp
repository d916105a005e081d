#include "affect/vision/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"

namespace affect::vision {

namespace {
constexpr const char* kGalleryMagic = "AFGAL1";

void check_threshold(double t) {
  if (!(t > 0.0 && t < 2.0)) throw ConfigError("gallery threshold must lie in (0, 2), got " + std::to_string(t));
}
}  // namespace

double cosine_similarity(const FaceEmbedding& a, const FaceEmbedding& b) {
  if (a.dim() != b.dim()) {
    throw ShapeError("embedding dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    ab += double{x[i]} * y[i];
    aa += double{x[i]} * x[i];
    bb += double{y[i]} * y[i];
  }
  if (aa == 0.0 || bb == 0.0) throw DataError("cosine similarity of a zero-norm embedding");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

FaceGallery::FaceGallery(double threshold) : threshold_(threshold) { check_threshold(threshold); }

void FaceGallery::add(std::string identity, FaceEmbedding embedding) {
  if (identity.empty()) throw ConfigError("gallery identity must be non-empty");
  if (embedding.dim() == 0) throw DataError("gallery entry '" + identity + "' has an empty embedding");
  if (!entries_.empty() && embedding.dim() != entries_.front().embedding.dim()) {
    throw ShapeError("gallery entry '" + identity + "' has dim " + std::to_string(embedding.dim()) +
                     ", gallery uses " + std::to_string(entries_.front().embedding.dim()));
  }
  entries_.push_back({std::move(identity), std::move(embedding)});
}

FaceGallery FaceGallery::with_threshold(double threshold) const {
  FaceGallery g(threshold);
  g.entries_ = entries_;
  return g;
}

std::optional<GalleryMatch> match_gallery(const FaceEmbedding& e, const FaceGallery& g) {
  if (g.empty()) throw ConfigError("cannot match against an empty gallery");
  const GalleryEntry* best = nullptr;
  double best_d = 0.0;
  for (const auto& entry : g.entries()) {
    const double d = 1.0 - cosine_similarity(e, entry.embedding);
    if (best == nullptr || d < best_d) {
      best = &entry;
      best_d = d;
    }
  }
  if (best_d < g.threshold()) return GalleryMatch{best->identity, best_d};
  return std::nullopt;
}

std::vector<std::uint8_t> encode_gallery(const FaceGallery& g) {
  io::ByteWriter w;
  w.magic(kGalleryMagic);
  w.u32(static_cast<std::uint32_t>(g.size()));
  w.u32(static_cast<std::uint32_t>(kEmbeddingDim));
  for (const auto& entry : g.entries()) {
    if (entry.embedding.dim() != kEmbeddingDim) {
      throw ShapeError("AFGAL1 stores " + std::to_string(kEmbeddingDim) + "-dim embeddings, entry '" +
                       entry.identity + "' has " + std::to_string(entry.embedding.dim()));
    }
    w.short_string(entry.identity);
    for (float v : entry.embedding.values()) w.f32(v);
  }
  return w.take();
}

FaceGallery decode_gallery(std::span<const std::uint8_t> bytes, double threshold) {
  io::ByteReader r(bytes, "AFGAL1");
  r.expect_magic(kGalleryMagic);
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  if (dim != kEmbeddingDim) throw FormatError("AFGAL1: embedding dim " + std::to_string(dim) + ", expected 128");
  FaceGallery g(threshold);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.short_string();
    std::vector<float> v(dim);
    for (float& x : v) x = r.f32();
    try {
      g.add(std::move(name), FaceEmbedding(std::move(v)));
    } catch (const Error& e) {
      throw FormatError("AFGAL1 entry " + std::to_string(i) + ": " + e.what());
    }
  }
  r.expect_end();
  return g;
}

void save_gallery(const std::filesystem::path& path, const FaceGallery& g) {
  io::write_file(path, encode_gallery(g));
}

FaceGallery load_gallery(const std::filesystem::path& path, double threshold) {
  return decode_gallery(io::read_file(path), threshold);
}

}  // namespace affect::vision
