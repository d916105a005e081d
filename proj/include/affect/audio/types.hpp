#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "affect/core/matrix.hpp"

namespace affect::audio {

// Mono waveform, amplitudes in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 0;

  double seconds() const {
    return sample_rate_hz == 0 ? 0.0 : static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Fixed-length window of a buffer; the final window of a recording is
// zero-padded at the end.
struct AudioSegment {
  std::vector<double> samples;
  std::size_t pad_count = 0;
  std::uint32_t sample_rate_hz = 0;
  std::size_t index = 0;
};

struct MelFilterbank {
  Matrix weights;  // n_mels x (n_fft/2 + 1)
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  std::uint32_t sample_rate_hz = 0;
  std::size_t n_fft = 0;

  std::size_t n_mels() const { return weights.rows(); }
};

struct SpectrogramMeta {
  std::string source_id;
  std::size_t segment_index = 0;
  std::size_t n_fft = 0;
  std::size_t hop = 0;
};

// n_mels x n_frames natural-log mel power.
struct LogMelSpectrogram {
  Matrix values;
  SpectrogramMeta meta;
};

// Scalar statistics pooled over every entry of a training corpus.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;

  bool operator==(const NormStats&) const = default;
};

}  // namespace affect::audio
