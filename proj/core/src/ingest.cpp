#include "panoforge/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panoforge/errors.hpp"

namespace panoforge {

namespace {

using nlohmann::json;

}  // namespace

const char* to_string(ProjectionFormat f) {
  return f == ProjectionFormat::equirectangular ? "equirectangular" : "other";
}

ProjectionFormat projection_format_from_string(const std::string& s) {
  if (s == "equirectangular") return ProjectionFormat::equirectangular;
  if (s == "other") return ProjectionFormat::other;
  throw DataError("unknown projection_format: " + s);
}

std::vector<VideoMeta> read_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog: " + path.string());
  std::vector<VideoMeta> catalog;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("catalog line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      VideoMeta m;
      m.video_id = j.at("video_id").get<std::string>();
      m.duration_s = j.at("duration_s").get<double>();
      m.category = j.at("category").get<std::string>();
      m.projection_format =
          projection_format_from_string(j.at("projection_format").get<std::string>());
      m.view_count = j.at("view_count").get<std::int64_t>();
      if (j.contains("language") && !j.at("language").is_null()) {
        m.language = j.at("language").get<std::string>();
      }
      if (m.video_id.empty()) {
        throw DataError("empty video_id");
      }
      if (!(m.duration_s >= 0.0)) throw DataError("negative duration_s");
      if (!ids.insert(m.video_id).second) {
        throw DataError("duplicate video_id " + m.video_id);
      }
      catalog.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw DataError("catalog line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("catalog line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return catalog;
}

void write_catalog(const std::vector<VideoMeta>& catalog,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write catalog: " + path.string());
  for (const VideoMeta& m : catalog) {
    json j;
    j["video_id"] = m.video_id;
    j["duration_s"] = m.duration_s;
    j["category"] = m.category;
    j["projection_format"] = to_string(m.projection_format);
    j["view_count"] = m.view_count;
    if (m.language) j["language"] = *m.language;
    out << j.dump() << "\n";
  }
}

std::vector<VideoMeta> filter_equirectangular(const std::vector<VideoMeta>& catalog) {
  std::vector<VideoMeta> out;
  for (const VideoMeta& m : catalog) {
    if (m.projection_format == ProjectionFormat::equirectangular) out.push_back(m);
  }
  return out;
}

namespace {

// Area-average resample of integer luma onto a gw x gh grid, computed in
// exact integer arithmetic. Cell boundaries land on multiples of 1/gw (resp.
// 1/gh) pixels, so coverages scaled by gw (resp. gh) are integers and every
// cell has the same scaled area. Comparing the returned integrals compares
// the averages exactly, and a uniform brightness shift moves every integral
// by the same constant.
std::vector<std::int64_t> luma_area_integrals(const Image& img, int gw, int gh) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(gw) * gh, 0);
  const std::int64_t w = img.width;
  const std::int64_t h = img.height;
  for (int gy = 0; gy < gh; ++gy) {
    const std::int64_t ys = gy * h;        // cell top, in units of 1/gh px
    const std::int64_t ye = (gy + 1) * h;  // cell bottom
    for (int gx = 0; gx < gw; ++gx) {
      const std::int64_t xs = gx * w;
      const std::int64_t xe = (gx + 1) * w;
      std::int64_t acc = 0;
      for (std::int64_t y = ys / gh; y * gh < ye && y < h; ++y) {
        const std::int64_t cy =
            std::min((y + 1) * gh, ye) - std::max(y * gh, ys);
        if (cy <= 0) continue;
        for (std::int64_t x = xs / gw; x * gw < xe && x < w; ++x) {
          const std::int64_t cx =
              std::min((x + 1) * gw, xe) - std::max(x * gw, xs);
          if (cx <= 0) continue;
          const std::uint8_t* px = img.at(static_cast<int>(x), static_cast<int>(y));
          const std::int64_t luma = 299 * px[0] + 587 * px[1] + 114 * px[2];
          acc += luma * cx * cy;
        }
      }
      out[static_cast<std::size_t>(gy) * gw + gx] = acc;
    }
  }
  return out;
}

}  // namespace

std::uint64_t perceptual_hash(const Image& image) {
  if (image.empty()) throw DataError("cannot hash an empty image");
  const std::vector<std::int64_t> grid = luma_area_integrals(image, 9, 8);
  std::uint64_t hash = 0;
  int bit = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const std::int64_t left = grid[static_cast<std::size_t>(y) * 9 + x];
      const std::int64_t right = grid[static_cast<std::size_t>(y) * 9 + x + 1];
      if (left > right) hash |= (1ULL << bit);
      ++bit;
    }
  }
  return hash;
}

int hamming_distance(std::uint64_t a, std::uint64_t b) {
  return std::popcount(a ^ b);
}

std::vector<std::string> dedup(
    const std::vector<std::pair<std::string, Image>>& thumbnails, int hamming_max) {
  std::vector<std::string> kept;
  std::vector<std::uint64_t> kept_hashes;
  for (const auto& [video_id, thumb] : thumbnails) {
    const std::uint64_t h = perceptual_hash(thumb);
    bool unique = true;
    for (std::uint64_t k : kept_hashes) {
      if (hamming_distance(h, k) <= hamming_max) {
        unique = false;
        break;
      }
    }
    if (unique) {
      kept.push_back(video_id);
      kept_hashes.push_back(h);
    }
  }
  return kept;
}

CatalogStats compute_stats(const std::vector<VideoMeta>& catalog,
                           const std::vector<CorrespondenceRecord>& records) {
  CatalogStats stats;
  stats.video_count = catalog.size();
  std::set<std::string> known;
  for (const VideoMeta& m : catalog) {
    known.insert(m.video_id);
    ++stats.category_counts[m.category];
    const double minutes = m.duration_s / 60.0;
    std::size_t bucket = kDurationBucketEdgesMin.size();
    for (std::size_t b = 0; b < kDurationBucketEdgesMin.size(); ++b) {
      if (minutes < kDurationBucketEdgesMin[b]) {
        bucket = b;
        break;
      }
    }
    ++stats.duration_histogram[bucket];
  }

  std::set<std::pair<std::string, std::int64_t>> frames;
  for (const CorrespondenceRecord& rec : records) {
    if (!known.count(rec.video_id)) {
      throw DataError("manifest references unknown video " + rec.video_id);
    }
    frames.insert({rec.video_id, rec.ts_a});
    frames.insert({rec.video_id, rec.ts_b});
  }
  stats.total_frames = frames.size();
  stats.correspondence_count = records.size();
  stats.frames_per_video_mean =
      stats.video_count == 0
          ? 0.0
          : static_cast<double>(stats.total_frames) / stats.video_count;
  return stats;
}

std::string stats_to_json_text(const CatalogStats& stats) {
  nlohmann::ordered_json j;
  j["video_count"] = stats.video_count;
  j["total_frames"] = stats.total_frames;
  j["frames_per_video_mean"] = stats.frames_per_video_mean;
  j["duration_histogram"] = {
      {"bucket_edges_minutes", kDurationBucketEdgesMin},
      {"counts", stats.duration_histogram},
  };
  j["category_counts"] = stats.category_counts;
  j["correspondence_count"] = stats.correspondence_count;
  return j.dump(2) + "\n";
}

namespace {

std::string substitute(std::string tmpl, const std::string& key,
                       const std::string& value) {
  std::size_t pos;
  while ((pos = tmpl.find(key)) != std::string::npos) {
    tmpl.replace(pos, key.size(), value);
  }
  return tmpl;
}

}  // namespace

std::vector<std::filesystem::path> extract_frames(const std::string& decoder_cmd,
                                                  const std::filesystem::path& video,
                                                  const std::filesystem::path& out_dir,
                                                  double fps) {
  if (decoder_cmd.empty()) throw DataError("decoder_cmd is not configured");
  std::filesystem::create_directories(out_dir);
  std::string cmd = decoder_cmd;
  cmd = substitute(cmd, "{input}", video.string());
  cmd = substitute(cmd, "{fps}", std::to_string(fps));
  cmd = substitute(cmd, "{outdir}", out_dir.string());
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw ServiceError("decoder failed (exit " + std::to_string(status) +
                       "): " + cmd);
  }

  std::vector<std::pair<std::int64_t, std::filesystem::path>> frames;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::filesystem::path p = entry.path();
    if (p.extension() != ".png") {
      throw DataError("decoder emitted a non-PNG file: " + p.string());
    }
    const std::string stem = p.stem().string();
    if (stem.empty() || stem.find_first_not_of("0123456789") != std::string::npos) {
      throw DataError("frame not named {timestamp_ms}.png: " + p.string());
    }
    const Image img = load_png(p);  // throws DataError when malformed
    if (img.width != 2 * img.height) {
      throw DataError("frame violates W = 2H: " + p.string());
    }
    frames.emplace_back(std::stoll(stem), p);
  }
  if (frames.empty()) throw DataError("decoder produced no frames in " +
                                      out_dir.string());
  std::sort(frames.begin(), frames.end());
  std::vector<std::filesystem::path> out;
  out.reserve(frames.size());
  for (auto& [ts, p] : frames) out.push_back(std::move(p));
  return out;
}

}  // namespace panoforge
