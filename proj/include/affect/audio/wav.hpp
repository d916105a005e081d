#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "affect/audio/types.hpp"

namespace affect::audio {

enum class WavEncoding { kPcm16, kFloat32 };

// Decodes a RIFF/WAVE container holding PCM16 or IEEE float32 samples in one
// or two channels (WAVE_FORMAT_EXTENSIBLE is accepted with either subformat).
// Stereo is averaged to mono; PCM16 is scaled by 1/32768.
//
// Throws FormatError for a malformed container and UnsupportedCodecError for
// any other encoding or channel count.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// Mono writer; PCM16 rounds x*32768 and saturates.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, WavEncoding enc = WavEncoding::kPcm16);
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
               WavEncoding enc = WavEncoding::kPcm16);

}  // namespace affect::audio
