#pragma once

#include <cstddef>
#include <vector>

#include "affect/vision/types.hpp"

namespace affect::vision::synthetic {

// Geometry of a rendered face tile. The ring is the detector marker, the
// grid encodes identity, the mouth band encodes expression.
inline constexpr int kFaceSize = 32;
inline constexpr int kRingWidth = 2;
inline constexpr int kGridCells = 4;
inline constexpr int kCellSize = 5;
inline constexpr int kGridRow = 3;
inline constexpr int kGridCol = 6;
inline constexpr int kMouthRow = 24;
inline constexpr int kMouthCol = 8;
inline constexpr int kMouthRows = 5;
inline constexpr int kMouthCols = 16;

inline constexpr double kRingLevel = 1.0;
inline constexpr double kCellHigh = 0.85;
inline constexpr double kCellLow = 0.15;
inline constexpr double kSkinLevel = 0.5;
inline constexpr double kMouthPositive = 0.8;
inline constexpr double kMouthNeutral = 0.35;

// Number of distinct identity codes (rows of a 16x16 Walsh-Hadamard matrix).
// Row 0 is constant and never used as an identity.
inline constexpr int kCodeCount = kGridCells * kGridCells;

// +1 / -1 signs of Hadamard row `code`.
std::vector<int> hadamard_code(int code);

// Ideal embedding of an identity code (what SyntheticCodeEmbedder returns
// for an undistorted face tile).
FaceEmbedding code_embedding(int code);

// Draws a face tile onto `image` with its top-left corner at (row, col).
// `smile` in [0, 1] blends the mouth between neutral and positive.
void draw_face(Image& image, int row, int col, int code, double smile);

// Draws a lone filled marker square, used to exercise the detector.
void draw_marker(Image& image, int row, int col, int side);

}  // namespace affect::vision::synthetic
