#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "affect/cascade/labels.hpp"

namespace affect::cascade {

struct ManifestEntry {
  std::string clip_id;
  std::string participant_id;
  AffectLabel label = AffectLabel::kNeutral;
  std::filesystem::path audio_path;  // resolved against the manifest directory
  std::filesystem::path frames_dir;  // idem
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;
};

// CSV with header clip_id,participant_id,label,audio_path,frames_dir.
// Relative paths are taken relative to the manifest's directory. Duplicate
// or empty clip ids and unknown labels raise DataError.
Manifest read_manifest(const std::filesystem::path& path);

// Paths under `base_dir` are written relative to it.
void write_manifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace affect::cascade
