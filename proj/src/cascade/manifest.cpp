#include "affect/cascade/manifest.hpp"

#include <set>

#include "affect/core/csv.hpp"
#include "affect/core/error.hpp"

namespace affect::cascade {

Manifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("manifest not found: " + path.string());
  const CsvTable t = read_csv(path);
  const std::string origin = path.string();
  const std::size_t c_id = t.column("clip_id", origin);
  const std::size_t c_part = t.column("participant_id", origin);
  const std::size_t c_label = t.column("label", origin);
  const std::size_t c_audio = t.column("audio_path", origin);
  const std::size_t c_frames = t.column("frames_dir", origin);

  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = origin + " row " + std::to_string(r + 2);
    ManifestEntry e;
    e.clip_id = row[c_id];
    e.participant_id = row[c_part];
    if (e.clip_id.empty() || e.participant_id.empty()) throw DataError(where + ": empty clip or participant id");
    if (!seen.insert(e.clip_id).second) throw DataError(where + ": duplicate clip id '" + e.clip_id + "'");
    try {
      e.label = parse_affect_label(row[c_label]);
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path q(p);
      return q.is_absolute() ? q : m.base_dir / q;
    };
    e.audio_path = resolve(row[c_audio]);
    e.frames_dir = resolve(row[c_frames]);
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  CsvTable t;
  t.header = {"clip_id", "participant_id", "label", "audio_path", "frames_dir"};
  auto rel = [&](const std::filesystem::path& p) {
    if (m.base_dir.empty()) return p.generic_string();
    const auto r = p.lexically_relative(m.base_dir);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };
  for (const auto& e : m.entries) {
    t.rows.push_back({e.clip_id, e.participant_id, std::string(to_string(e.label)), rel(e.audio_path), rel(e.frames_dir)});
  }
  write_csv(path, t);
}

}  // namespace affect::cascade
