#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/core/random.hpp"
#include "affect/vision/crop.hpp"
#include "affect/vision/detector.hpp"
#include "affect/vision/frames.hpp"
#include "affect/vision/gallery.hpp"
#include "affect/vision/synthetic_face.hpp"
#include "doctest.h"
#include "support/tempdir.hpp"

using namespace affect;
using namespace affect::vision;
namespace syn = affect::vision::synthetic;

namespace {

FaceEmbedding unit(std::size_t i, std::size_t dim = kEmbeddingDim) {
  std::vector<float> v(dim, 0.0f);
  v[i] = 1.0f;
  return FaceEmbedding(std::move(v));
}

FaceEmbedding random_embedding(Rng& rng) {
  std::vector<float> v(kEmbeddingDim);
  for (float& x : v) x = static_cast<float>(rng.normal());
  return FaceEmbedding(std::move(v));
}

// Unit vector at angle acos(cos_theta) from e0 inside the (e0, e_axis) plane.
FaceEmbedding at_cosine(double cos_theta, std::size_t axis) {
  std::vector<float> v(kEmbeddingDim, 0.0f);
  v[0] = static_cast<float>(cos_theta);
  v[axis] = static_cast<float>(std::sqrt(1.0 - cos_theta * cos_theta));
  return FaceEmbedding(std::move(v));
}

// Long-double cosine, written out independently of the library.
double oracle_cosine(const FaceEmbedding& a, const FaceEmbedding& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += static_cast<long double>(a.values()[i]) * b.values()[i];
    aa += static_cast<long double>(a.values()[i]) * a.values()[i];
    bb += static_cast<long double>(b.values()[i]) * b.values()[i];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

// Brute-force nearest identity; first index wins ties.
std::optional<std::string> oracle_match(const FaceEmbedding& e, const std::vector<GalleryEntry>& entries,
                                        double threshold) {
  std::size_t best = 0;
  std::vector<double> d;
  for (const auto& entry : entries) d.push_back(1.0 - oracle_cosine(e, entry.embedding));
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  if (d[best] < threshold) return entries[best].identity;
  return std::nullopt;
}

Image blank(std::size_t rows = 96, std::size_t cols = 80, double level = 0.2) { return Image(rows, cols, level); }

}  // namespace

TEST_CASE("sample_frame_indices: training rates and test stride") {
  const ClipDescriptor clip{"c", 30.0, 300};
  const auto pos = sample_frame_indices(clip, SamplingMode::kTrainPositive);
  CHECK(pos.size() == 30);
  CHECK(pos.front() == 0);
  CHECK(pos[1] == 10);
  const auto neu = sample_frame_indices(clip, SamplingMode::kTrainNeutral);
  CHECK(neu.size() == 10);
  CHECK(neu[1] == 30);
  const auto test = sample_frame_indices(clip, SamplingMode::kTest);
  REQUIRE(test.size() == 60);
  for (std::size_t i = 0; i < test.size(); ++i) CHECK(test[i] == 5 * i);
  CHECK(test.back() == 295);
}

TEST_CASE("sample_frame_indices: empty clip and property sweep") {
  for (auto mode : {SamplingMode::kTrainPositive, SamplingMode::kTrainNeutral, SamplingMode::kTest}) {
    CHECK(sample_frame_indices({"e", 30.0, 0}, mode).empty());
  }
  for (std::size_t n : {1u, 4u, 5u, 6u, 99u, 301u}) {
    for (double fps : {24.0, 25.0, 29.97, 30.0, 60.0}) {
      const ClipDescriptor clip{"p", fps, n};
      const auto test = sample_frame_indices(clip, SamplingMode::kTest);
      std::vector<std::size_t> expect;
      for (std::size_t i = 0; i < n; ++i) {
        if (i % 5 == 0) expect.push_back(i);
      }
      CHECK(test == expect);
      for (auto mode : {SamplingMode::kTrainPositive, SamplingMode::kTrainNeutral}) {
        const auto idx = sample_frame_indices(clip, mode);
        CHECK(std::adjacent_find(idx.begin(), idx.end(), std::greater_equal<>()) == idx.end());
        CHECK(idx.back() < n);
      }
    }
  }
  CHECK_THROWS_AS(sample_frame_indices({"z", 0.0, 10}, SamplingMode::kTrainPositive), ConfigError);
}

TEST_CASE("sample_frames loads the sampled frames in order") {
  std::vector<Image> frames;
  for (int i = 0; i < 12; ++i) frames.push_back(Image(4, 4, i / 20.0));
  InMemoryFrameSource src("clip", 30.0, frames);
  const auto refs = sample_frames(src, SamplingMode::kTest);
  REQUIRE(refs.size() == 3);
  CHECK(refs[2].frame_index == 10);
  CHECK(refs[2].image == frames[10]);
  CHECK(refs[0].clip_id == "clip");
  CHECK_THROWS_AS(src.load(12), DataError);
}

TEST_CASE("DirectoryFrameSource reads sparse PGM frames") {
  testing::TempDir dir("frames");
  Image img(6, 5);
  for (std::size_t i = 0; i < img.size(); ++i) img.values()[i] = static_cast<double>(i * 8) / 255.0;
  DirectoryFrameSource::write_meta(dir.path(), 30.0, 20);
  write_pgm(dir / DirectoryFrameSource::frame_file_name(5), img);
  CHECK(DirectoryFrameSource::frame_file_name(5) == "frame_000005.pgm");

  DirectoryFrameSource src("d", dir.path());
  CHECK(src.descriptor().frame_count == 20);
  CHECK(src.descriptor().fps == 30.0);
  const Image back = src.load(5);
  CHECK(back.shape() == img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.values()[i] == doctest::Approx(img.values()[i]));
  CHECK_THROWS_AS(src.load(0), DataError);
  CHECK_THROWS_AS(src.load(20), DataError);
  CHECK_THROWS_AS(DirectoryFrameSource("x", dir / "missing"), DataError);
}

TEST_CASE("read_pgm: ASCII and 16-bit variants, malformed headers") {
  testing::TempDir dir("pgm");
  io::write_text(dir / "a.pgm", "P2\n# comment\n3 2\n4\n0 1 2\n3 4 4\n");
  const Image a = read_pgm(dir / "a.pgm");
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(1, 0) == 0.75);
  const std::vector<std::uint8_t> wide = {'P', '5', '\n', '2', ' ', '1', '\n', '6', '5', '5', '3', '5', '\n',
                                          0xFF, 0xFF, 0x00, 0x00};
  io::write_file(dir / "w.pgm", wide);
  const Image w = read_pgm(dir / "w.pgm");
  CHECK(w(0, 0) == 1.0);
  CHECK(w(0, 1) == 0.0);
  io::write_text(dir / "bad.pgm", "P6\n1 1\n255\nx");
  CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), FormatError);
  io::write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), FormatError);
}

TEST_CASE("detector: planted markers and blank frames") {
  SyntheticMarkerDetector det;
  Image one = blank();
  syn::draw_marker(one, 10, 20, 16);
  const auto boxes = detect_faces({"c", 0, one}, det);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == FaceBox{20, 10, 16, 16, 1.0});

  Image two = blank();
  syn::draw_face(two, 5, 5, 3, 1.0);
  syn::draw_face(two, 50, 40, 9, 0.0);
  const auto both = detect_faces({"c", 1, two}, det);
  REQUIRE(both.size() == 2);
  std::set<std::pair<int, int>> corners;
  for (const auto& b : both) {
    corners.insert({b.y, b.x});
    CHECK(b.w == syn::kFaceSize);
    CHECK(b.h == syn::kFaceSize);
  }
  CHECK(corners == std::set<std::pair<int, int>>{{5, 5}, {50, 40}});

  CHECK(detect_faces({"c", 2, blank()}, det).empty());

  Image tiny = blank();
  syn::draw_marker(tiny, 3, 3, 4);
  CHECK(detect_faces({"c", 3, tiny}, det).empty());
}

TEST_CASE("detect_faces sorts, clamps and wraps failures with the frame index") {
  struct Fixed final : FaceDetector {
    std::vector<FaceBox> detect(const Image&) const override {
      return {{0, 0, 4, 4, 0.2}, {-5, -5, 10, 10, 0.9}, {100, 100, 5, 5, 0.95}, {1, 1, 2, 2, 0.5}};
    }
  };
  const auto boxes = detect_faces({"c", 0, blank(20, 20)}, Fixed{});
  REQUIRE(boxes.size() == 3);
  CHECK(boxes[0] == FaceBox{0, 0, 5, 5, 0.9});
  CHECK(boxes[1].confidence == 0.5);
  CHECK(boxes[2].confidence == 0.2);

  struct Failing final : FaceDetector {
    std::vector<FaceBox> detect(const Image&) const override { throw std::runtime_error("model crashed"); }
  };
  try {
    detect_faces({"clip7", 42, blank()}, Failing{});
    FAIL("expected DetectorError");
  } catch (const DetectorError& e) {
    CHECK(e.frame_index() == 42);
    CHECK(std::string(e.what()).find("frame 42") != std::string::npos);
  }
}

TEST_CASE("cosine_similarity closed forms and properties") {
  CHECK(cosine_similarity(unit(0), unit(0)) == doctest::Approx(1.0));
  CHECK(cosine_similarity(unit(0), unit(1)) == doctest::Approx(0.0));
  std::vector<float> v(kEmbeddingDim, 0.0f);
  v[0] = v[1] = 1.0f;
  CHECK(cosine_similarity(unit(0), FaceEmbedding(v)) == doctest::Approx(0.70710678).epsilon(1e-8));

  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_embedding(rng);
    const auto b = random_embedding(rng);
    const double s = cosine_similarity(a, b);
    CHECK(s == doctest::Approx(oracle_cosine(a, b)).epsilon(1e-6));
    CHECK(s == cosine_similarity(b, a));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    const double c = rng.uniform(0.1, 10.0);
    std::vector<float> scaled(b.values().begin(), b.values().end());
    for (float& x : scaled) x = static_cast<float>(x * c);
    CHECK(cosine_similarity(a, FaceEmbedding(scaled)) == doctest::Approx(s).epsilon(1e-6));
  }
  CHECK_THROWS_AS(cosine_similarity(unit(0), unit(0, 64)), ShapeError);
  CHECK_THROWS_AS(cosine_similarity(unit(0), FaceEmbedding{}), ShapeError);
  CHECK_THROWS_AS(FaceEmbedding(std::vector<float>(kEmbeddingDim, 0.0f)), DataError);
  CHECK_THROWS_AS(FaceEmbedding(std::vector<float>{1.0f, NAN}), DataError);
}

TEST_CASE("match_gallery examples") {
  FaceGallery g(0.4);
  g.add("alice", unit(3));
  g.add("bob", unit(4));
  const auto hit = match_gallery(unit(3), g);
  REQUIRE(hit);
  CHECK(hit->identity == "alice");
  CHECK(hit->distance == doctest::Approx(0.0));
  CHECK_FALSE(match_gallery(unit(7), g));

  FaceGallery near(0.4);
  near.add("far", at_cosine(0.75, 2));
  near.add("close", at_cosine(0.90, 5));
  const auto m = match_gallery(unit(0), near);
  REQUIRE(m);
  CHECK(m->identity == "close");
  CHECK(m->distance == doctest::Approx(0.10).epsilon(1e-6));

  FaceGallery tie(0.4);
  tie.add("first", unit(1));
  tie.add("second", unit(1));
  CHECK(match_gallery(unit(1), tie)->identity == "first");

  CHECK_THROWS_AS(match_gallery(unit(0), FaceGallery(0.4)), ConfigError);
  CHECK_THROWS_AS(FaceGallery(0.0), ConfigError);
  CHECK_THROWS_AS(FaceGallery(2.0), ConfigError);
  CHECK_THROWS_AS(g.add("", unit(1)), ConfigError);
}

TEST_CASE("match_gallery dichotomy and order invariance against brute force") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const double threshold = rng.uniform(0.05, 1.5);
    std::vector<GalleryEntry> entries;
    const auto n = static_cast<std::size_t>(rng.between(1, 8));
    for (std::size_t i = 0; i < n; ++i) entries.push_back({"id" + std::to_string(i), random_embedding(rng)});
    FaceGallery g(threshold);
    for (const auto& e : entries) g.add(e.identity, e.embedding);

    for (int q = 0; q < 10; ++q) {
      // Half the probes are perturbed gallery entries so both branches occur.
      FaceEmbedding probe = random_embedding(rng);
      if (q % 2 == 0) {
        const auto& base = entries[rng.below(n)].embedding;
        std::vector<float> v(base.values().begin(), base.values().end());
        for (float& x : v) x += static_cast<float>(0.3 * rng.normal());
        probe = FaceEmbedding(v);
      }
      const auto got = match_gallery(probe, g);
      const auto want = oracle_match(probe, entries, threshold);
      CHECK(got.has_value() == want.has_value());
      if (got && want) CHECK(got->identity == *want);
      if (got) CHECK(got->distance < threshold);

      auto shuffled = entries;
      rng.shuffle(shuffled);
      FaceGallery g2(threshold);
      for (const auto& e : shuffled) g2.add(e.identity, e.embedding);
      const auto got2 = match_gallery(probe, g2);
      CHECK(got2.has_value() == got.has_value());
      if (got && got2) CHECK(got2->identity == got->identity);
    }
  }
}

TEST_CASE("AFGAL1 round trip is bit exact") {
  Rng rng(5);
  FaceGallery g;
  g.add("child_01", random_embedding(rng));
  g.add("ñandú", random_embedding(rng));
  g.add("child_01", syn::code_embedding(4));
  const auto bytes = encode_gallery(g);
  CHECK(bytes.size() == 6 + 4 + 4 + 3 * (2 + 128 * 4) + 8 + 7 + 8);
  const FaceGallery back = decode_gallery(bytes, 0.3);
  CHECK(back.entries() == g.entries());
  CHECK(back.threshold() == 0.3);
  CHECK(encode_gallery(back) == bytes);

  testing::TempDir dir("gal");
  save_gallery(dir / "g.afgal", g);
  CHECK(load_gallery(dir / "g.afgal").entries() == g.entries());

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_gallery(truncated), FormatError);
  auto bad_dim = bytes;
  bad_dim[10] = 64;
  CHECK_THROWS_AS(decode_gallery(bad_dim), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_gallery(bad_magic), FormatError);
  FaceGallery small;
  small.add("x", unit(0, 8));
  CHECK_THROWS_AS(encode_gallery(small), ShapeError);
}

TEST_CASE("synthetic embedder recovers identity codes") {
  SyntheticMarkerDetector det;
  SyntheticCodeEmbedder emb;
  for (int code = 1; code < syn::kCodeCount; ++code) {
    CHECK(cosine_similarity(syn::code_embedding(code), syn::code_embedding(code)) == doctest::Approx(1.0));
    for (int other = 1; other < code; ++other) {
      CHECK(std::abs(cosine_similarity(syn::code_embedding(code), syn::code_embedding(other))) < 1e-6);
    }
    Image frame = blank();
    syn::draw_face(frame, 20, 15, code, code % 2);
    const auto boxes = detect_faces({"c", 0, frame}, det);
    REQUIRE(boxes.size() == 1);
    const auto e = emb.embed(crop(frame, boxes[0]));
    CHECK(cosine_similarity(e, syn::code_embedding(code)) > 0.999);
  }
  const auto flat = emb.embed(Image(32, 32, 0.5));
  CHECK(flat == unit(0));
  CHECK_THROWS_AS(syn::hadamard_code(16), ConfigError);
}

TEST_CASE("prepare_face_crop shapes, determinism and degenerate boxes") {
  Image frame = blank();
  syn::draw_face(frame, 10, 10, 5, 1.0);
  const FaceBox box{10, 10, 32, 32, 1.0};
  Rng rng(1);
  const auto test = prepare_face_crop(frame, box, CropMode::kTest, rng);
  REQUIRE(test);
  CHECK(test->rows() == 44);
  CHECK(test->cols() == 44);

  Rng a(77), b(77);
  const auto ta = prepare_face_crop(frame, box, CropMode::kTrain, a);
  const auto tb = prepare_face_crop(frame, box, CropMode::kTrain, b);
  REQUIRE(ta);
  CHECK(ta->shape() == Shape{44, 44});
  CHECK(*ta == *tb);
  for (double v : ta->values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  const Image flat(40, 40, 0.3);
  const auto fc = prepare_face_crop(flat, {2, 2, 30, 20, 1.0}, CropMode::kTrain, rng);
  for (double v : fc->values()) CHECK(v == doctest::Approx(0.3));

  CHECK_FALSE(prepare_face_crop(frame, {200, 200, 10, 10, 1.0}, CropMode::kTest, rng));
  CHECK_FALSE(prepare_face_crop(frame, {5, 5, 0, 10, 1.0}, CropMode::kTest, rng));
}

TEST_CASE("augment: identity params, illumination, determinism") {
  Image face(48, 48);
  for (std::size_t r = 0; r < 48; ++r) {
    for (std::size_t c = 0; c < 48; ++c) face(r, c) = static_cast<double>(r * 48 + c) / (48.0 * 48.0);
  }
  Rng rng(3);
  const AugmentParams identity{0.0, 0, 1.0, 1.0};
  const Image centre = augment(face, rng, identity);
  REQUIRE(centre.shape() == Shape{44, 44});
  for (std::size_t r = 0; r < 44; ++r) {
    for (std::size_t c = 0; c < 44; ++c) CHECK(centre(r, c) == face(r + 2, c + 2));
  }

  const Image dim = augment(Image(48, 48, 0.8), rng, {15.0, 3, 0.5, 0.5});
  for (double v : dim.values()) CHECK(v == doctest::Approx(0.4));

  Rng a(99), b(99);
  CHECK(augment(face, a) == augment(face, b));
  Rng c(100);
  CHECK_FALSE(augment(face, a) == augment(face, c));

  const Image bright = augment(Image(48, 48, 0.9), rng, {0.0, 0, 2.0, 2.0});
  for (double v : bright.values()) CHECK(v == 1.0);
  CHECK_THROWS_AS(augment(Image(44, 44), rng), ShapeError);
  CHECK_THROWS_AS(augment(face, rng, {-1.0, 0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("normalize_face gives zero mean and unit deviation") {
  Rng rng(8);
  Image face(44, 44);
  for (double& v : face.values()) v = rng.uniform();
  const Image z = normalize_face(face);
  double mean = 0.0, sq = 0.0;
  for (double v : z.values()) mean += v;
  mean /= static_cast<double>(z.size());
  for (double v : z.values()) sq += (v - mean) * (v - mean);
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::sqrt(sq / static_cast<double>(z.size())) == doctest::Approx(1.0));
  const Image flat = normalize_face(Image(4, 4, 0.7));
  for (double v : flat.values()) CHECK(v == 0.0);
}
