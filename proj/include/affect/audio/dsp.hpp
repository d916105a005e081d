#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "affect/audio/types.hpp"
#include "affect/core/matrix.hpp"
#include "affect/core/resize.hpp"

namespace affect::audio {

inline constexpr std::size_t kDefaultFft = 2048;
inline constexpr std::size_t kDefaultHop = 512;
inline constexpr std::size_t kDefaultMels = 64;
inline constexpr double kDefaultSegmentSeconds = 3.0;
inline constexpr double kDefaultPowerFloor = 1e-10;
inline constexpr double kDefaultGateDb = -40.0;
inline constexpr double kDefaultMinSilenceMs = 500.0;
inline constexpr double kDefaultNoiseReductionDb = 12.0;
inline constexpr std::size_t kTrimFrameLength = 512;

// ---------------------------------------------------------------------------
// Short-time Fourier transform
// ---------------------------------------------------------------------------

// Frame-major complex spectra: element (frame t, bin k) at t*n_bins + k.
struct ComplexSpectrogram {
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  std::size_t n_bins = 0;
  std::size_t n_frames = 0;
  std::vector<double> re;
  std::vector<double> im;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Centered STFT: the signal is reflection-padded by n_fft/2 on both sides,
// frames are Hann-windowed, n_frames = floor(len/hop) + 1.
ComplexSpectrogram stft(std::span<const double> signal, std::size_t n_fft, std::size_t hop);

// Weighted overlap-add inverse of stft(); returns `length` samples.
std::vector<double> istft(const ComplexSpectrogram& spec, std::size_t length);

// (n_fft/2+1) x n_frames power spectrogram of one segment.
// Throws ConfigError for a non power-of-two n_fft or hop outside (0, n_fft],
// DataError when the segment is shorter than one hop.
Matrix stft_power(const AudioSegment& seg, std::size_t n_fft = kDefaultFft,
                  std::size_t hop = kDefaultHop);
Matrix stft_power(std::span<const double> samples, std::size_t n_fft = kDefaultFft,
                  std::size_t hop = kDefaultHop);

// ---------------------------------------------------------------------------
// Cleanup and segmentation
// ---------------------------------------------------------------------------

// Removes runs of quiet frames longer than min_silence_ms. A frame is quiet
// when its RMS is below peak_rms * 10^(gate_db/20). Frames are non-overlapping
// windows of `frame_length` samples. Never returns an empty buffer: if every
// frame would be removed, the loudest frame window is returned.
AudioBuffer trim_silence(const AudioBuffer& buf, double gate_db = kDefaultGateDb,
                         double min_silence_ms = kDefaultMinSilenceMs,
                         std::size_t frame_length = kTrimFrameLength);

// Spectral gating noise reduction. The per-bin noise floor is the mean
// magnitude over the quietest 10% of frames, capped at four times the median
// floor across bins so stationary tones are not mistaken for noise. Bins at
// or below floor * 10^(reduction_db/20) are attenuated by reduction_db.
// Output length equals input length and output energy never exceeds input
// energy. Buffers shorter than one FFT frame are returned unchanged.
AudioBuffer spectral_gate(const AudioBuffer& buf, double reduction_db = kDefaultNoiseReductionDb,
                          std::size_t n_fft = kDefaultFft, std::size_t hop = kDefaultHop);

// Splits into ceil(len / (seg_seconds * rate)) windows, zero-padding the last.
std::vector<AudioSegment> segment(const AudioBuffer& buf,
                                  double seg_seconds = kDefaultSegmentSeconds);

// ---------------------------------------------------------------------------
// Mel features
// ---------------------------------------------------------------------------

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with centers equally spaced in mel between mel(fmin)
// and mel(fmax). fmax_hz < 0 means sr/2.
MelFilterbank build_mel_filterbank(std::uint32_t sample_rate_hz, std::size_t n_mels = kDefaultMels,
                                   std::size_t n_fft = kDefaultFft, double fmin_hz = 0.0,
                                   double fmax_hz = -1.0);

// ln(max(fb * power, floor)).
LogMelSpectrogram log_mel(const Matrix& power, const MelFilterbank& fb,
                          double floor = kDefaultPowerFloor);

NormStats fit_norm_stats(std::span<const LogMelSpectrogram> corpus);
NormStats fit_norm_stats(std::span<const Matrix> corpus);
LogMelSpectrogram standardize(const LogMelSpectrogram& s, const NormStats& stats);
Matrix standardize(const Matrix& m, const NormStats& stats);

// Spectrograms are resized for CNN-style backends with the shared
// corner-aligned bilinear resampler.
using affect::resize_bilinear;

}  // namespace affect::audio
