#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "panoforge/search.hpp"

namespace panoforge {

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestFrame {
  std::int64_t timestamp_ms = 0;
  float yaw = 0.0f;
  float pitch = 0.0f;
  float fov = 0.0f;
};

/// One correspondence line of the on-disk manifest. Floats are 32-bit and
/// serialize with 9 significant digits, which round-trips them exactly.
struct ManifestRecord {
  int schema_version = kManifestSchemaVersion;
  std::string video_id;
  ManifestFrame frame_a;
  ManifestFrame frame_b;
  std::array<float, 4> rotation_wxyz = {1.0f, 0.0f, 0.0f, 0.0f};
  std::array<float, 3> translation_m = {0.0f, 0.0f, 0.0f};
  float mean_conf = 0.0f;
  float sigma = 1.0f;
  std::string provenance = "window";
  std::string scale_state = "raw";
};

/// Throws DataError naming the offending field when an invariant fails.
void validate_record(const ManifestRecord& rec);

ManifestRecord to_manifest(const CorrespondenceRecord& rec);
CorrespondenceRecord from_manifest(const ManifestRecord& rec);

/// JSON-lines, fixed key order, records sorted by (video_id, frame_a.ts,
/// frame_b.ts, frame_a.yaw, frame_b.yaw). Byte-deterministic for equal
/// inputs; an empty record list produces an empty file.
void write_manifest(const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& path);

std::string manifest_line(const ManifestRecord& rec);

/// Parses and re-validates every record; failures carry the line number.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

struct ValidationReport {
  std::size_t ok = 0;
  std::size_t missing = 0;
  std::size_t corrupt = 0;
  std::vector<std::string> issues;
};

/// Checks that every frame referenced by the manifest exists under
/// frames_root/{video_id}/{timestamp_ms}.png and loads as a PNG.
ValidationReport validate_manifest(const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& frames_root);

}  // namespace panoforge
