#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "affect/audio/types.hpp"
#include "affect/core/matrix.hpp"

namespace affect::audio {

// "AFMEL1": magic, u32-LE rows, u32-LE cols, rows*cols float32-LE row-major.
// Values are narrowed to float32 on save, so load(save(m)) == m exactly for
// float-representable matrices and save(load(bytes)) == bytes always.
std::vector<std::uint8_t> encode_spectrogram(const Matrix& m);
Matrix decode_spectrogram(std::span<const std::uint8_t> bytes);
void save_spectrogram(const std::filesystem::path& path, const Matrix& m);
Matrix load_spectrogram(const std::filesystem::path& path);

// "AFNRM1": magic, mean f64-LE, std f64-LE.
std::vector<std::uint8_t> encode_norm_stats(const NormStats& s);
NormStats decode_norm_stats(std::span<const std::uint8_t> bytes);
void save_norm_stats(const std::filesystem::path& path, const NormStats& s);
NormStats load_norm_stats(const std::filesystem::path& path);

}  // namespace affect::audio
