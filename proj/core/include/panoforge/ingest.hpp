#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panoforge/image.hpp"
#include "panoforge/search.hpp"

namespace panoforge {

enum class ProjectionFormat { equirectangular, other };
const char* to_string(ProjectionFormat f);
ProjectionFormat projection_format_from_string(const std::string& s);

struct VideoMeta {
  std::string video_id;
  double duration_s = 0.0;
  std::string category;
  ProjectionFormat projection_format = ProjectionFormat::other;
  std::int64_t view_count = 0;
  std::optional<std::string> language;
};

/// Catalog file: JSON-lines, one VideoMeta per line.
std::vector<VideoMeta> read_catalog(const std::filesystem::path& path);
void write_catalog(const std::vector<VideoMeta>& catalog,
                   const std::filesystem::path& path);

/// Keeps exactly the equirectangular records, preserving order.
std::vector<VideoMeta> filter_equirectangular(const std::vector<VideoMeta>& catalog);

/// Difference hash: grayscale, area-average resize to 9x8, one bit per
/// horizontal neighbor comparison. Invariant under uniform brightness shift.
std::uint64_t perceptual_hash(const Image& image);

int hamming_distance(std::uint64_t a, std::uint64_t b);

/// Greedy first-wins dedup: a video is kept iff its thumbnail hash is more
/// than hamming_max bits from every previously kept hash.
std::vector<std::string> dedup(
    const std::vector<std::pair<std::string, Image>>& thumbnails, int hamming_max);

/// Duration histogram buckets, minutes: 0-1, 1-5, 5-10, 10-30, 30+.
inline constexpr std::array<double, 4> kDurationBucketEdgesMin = {1.0, 5.0, 10.0, 30.0};

struct CatalogStats {
  std::size_t video_count = 0;
  std::size_t total_frames = 0;  // unique frames referenced by the manifest
  double frames_per_video_mean = 0.0;
  std::array<std::size_t, 5> duration_histogram{};  // counts per bucket
  std::map<std::string, std::size_t> category_counts;
  std::size_t correspondence_count = 0;
};

/// Aggregates catalog and manifest counts. Throws DataError when the
/// manifest references a video missing from the catalog.
CatalogStats compute_stats(const std::vector<VideoMeta>& catalog,
                           const std::vector<CorrespondenceRecord>& records);

std::string stats_to_json_text(const CatalogStats& stats);

/// Runs the external decoder command template ({input}, {fps}, {outdir}
/// placeholders) and verifies the outputs: PNG files named
/// {timestamp_ms}.png satisfying W = 2H. Returns the validated frame paths
/// sorted by timestamp.
std::vector<std::filesystem::path> extract_frames(const std::string& decoder_cmd,
                                                  const std::filesystem::path& video,
                                                  const std::filesystem::path& out_dir,
                                                  double fps);

}  // namespace panoforge
