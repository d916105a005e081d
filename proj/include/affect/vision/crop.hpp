#pragma once

#include <optional>

#include "affect/core/random.hpp"
#include "affect/vision/types.hpp"

namespace affect::vision {

enum class CropMode { kTrain, kTest };

inline constexpr std::size_t kTrainResize = 48;
inline constexpr std::size_t kFaceInput = 44;

// Cuts the box out of the frame and sizes it for the expression
// classifier. Train resizes to 48x48 and takes a random 44x44 window; Test
// resizes straight to 44x44. nullopt when the clamped box is empty.
std::optional<Image> prepare_face_crop(const Image& image, const FaceBox& box, CropMode mode, Rng& rng);

struct AugmentParams {
  double max_rotation_deg = 10.0;
  int max_shift_px = 2;
  double illumination_min = 0.8;
  double illumination_max = 1.2;
};

// Random rotation about the centre, integer shift (edge pixels
// replicated), multiplicative illumination clamped to [0, 1], then the
// centre 44x44 window. Throws ShapeError for faces smaller than 48x48.
Image augment(const Image& face, Rng& rng, const AugmentParams& params = {});

// Zero mean, unit standard deviation. A constant face maps to all zeros.
Image normalize_face(const Image& face);

}  // namespace affect::vision
