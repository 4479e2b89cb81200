#include "panoforge/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panoforge/errors.hpp"
#include "panoforge/geometry.hpp"
#include "panoforge/image.hpp"

namespace panoforge {

namespace {

using nlohmann::json;

std::string fmt_float(float v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

std::string json_string(const std::string& s) { return json(s).dump(); }

void append_frame(std::string& out, const ManifestFrame& f) {
  out += "{\"timestamp_ms\":";
  out += std::to_string(f.timestamp_ms);
  out += ",\"yaw\":";
  out += fmt_float(f.yaw);
  out += ",\"pitch\":";
  out += fmt_float(f.pitch);
  out += ",\"fov\":";
  out += fmt_float(f.fov);
  out += "}";
}

constexpr double kAngleTol = 1e-6;  // absorbs float32 rounding of the bounds

void validate_frame(const ManifestFrame& f, const char* name) {
  if (f.timestamp_ms < 0) {
    throw DataError(std::string(name) + ".timestamp_ms must be nonnegative");
  }
  if (!std::isfinite(f.yaw) || f.yaw < 0.0f ||
      static_cast<double>(f.yaw) >= 2.0 * kPi + kAngleTol) {
    throw DataError(std::string(name) + ".yaw out of [0, 2*pi)");
  }
  if (!std::isfinite(f.pitch) ||
      std::abs(static_cast<double>(f.pitch)) > kPi / 2.0 + kAngleTol) {
    throw DataError(std::string(name) + ".pitch out of [-pi/2, pi/2]");
  }
  if (!std::isfinite(f.fov) || f.fov <= 0.0f ||
      static_cast<double>(f.fov) >= kPi - kAngleTol) {
    throw DataError(std::string(name) + ".fov out of (0, pi)");
  }
}

float wrap_yaw_f(double yaw) {
  float y = static_cast<float>(wrap_yaw(yaw));
  if (!(static_cast<double>(y) < 2.0 * kPi)) y = 0.0f;
  return y;
}

}  // namespace

void validate_record(const ManifestRecord& rec) {
  if (rec.schema_version != kManifestSchemaVersion) {
    throw DataError("unknown schema_version " + std::to_string(rec.schema_version));
  }
  if (rec.video_id.empty()) throw DataError("video_id must be non-empty");
  validate_frame(rec.frame_a, "frame_a");
  validate_frame(rec.frame_b, "frame_b");
  if (!(rec.frame_a.timestamp_ms < rec.frame_b.timestamp_ms)) {
    throw DataError("frame_a timestamp must precede frame_b");
  }
  double norm_sq = 0.0;
  for (float q : rec.rotation_wxyz) {
    if (!std::isfinite(q)) throw DataError("rotation_wxyz must be finite");
    norm_sq += static_cast<double>(q) * q;
  }
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6) {
    throw DataError("rotation_wxyz must have unit norm");
  }
  for (float t : rec.translation_m) {
    if (!std::isfinite(t)) throw DataError("translation_m must be finite");
  }
  if (!std::isfinite(rec.mean_conf) || rec.mean_conf < 0.0f) {
    throw DataError("mean_conf must be nonnegative");
  }
  if (!std::isfinite(rec.sigma) || !(rec.sigma > 0.0f)) {
    throw DataError("sigma must be positive");
  }
  provenance_from_string(rec.provenance);
  scale_state_from_string(rec.scale_state);
}

ManifestRecord to_manifest(const CorrespondenceRecord& rec) {
  ManifestRecord m;
  m.video_id = rec.video_id;
  m.frame_a = {rec.ts_a, wrap_yaw_f(rec.angles_a.yaw),
               static_cast<float>(rec.angles_a.pitch),
               static_cast<float>(rec.angles_a.fov)};
  m.frame_b = {rec.ts_b, wrap_yaw_f(rec.angles_b.yaw),
               static_cast<float>(rec.angles_b.pitch),
               static_cast<float>(rec.angles_b.fov)};
  const Eigen::Quaterniond q = canonical_quaternion(rec.pose.rotation);
  m.rotation_wxyz = {static_cast<float>(q.w()), static_cast<float>(q.x()),
                     static_cast<float>(q.y()), static_cast<float>(q.z())};
  m.translation_m = {static_cast<float>(rec.pose.translation.x()),
                     static_cast<float>(rec.pose.translation.y()),
                     static_cast<float>(rec.pose.translation.z())};
  m.mean_conf = static_cast<float>(rec.mean_conf);
  m.sigma = static_cast<float>(rec.sigma);
  m.provenance = to_string(rec.provenance);
  m.scale_state = to_string(rec.pose.scale_state);
  return m;
}

CorrespondenceRecord from_manifest(const ManifestRecord& rec) {
  CorrespondenceRecord out;
  out.video_id = rec.video_id;
  out.ts_a = rec.frame_a.timestamp_ms;
  out.ts_b = rec.frame_b.timestamp_ms;
  out.angles_a = make_view_angles(std::clamp<double>(rec.frame_a.pitch, -kPi / 2, kPi / 2),
                                  rec.frame_a.yaw, rec.frame_a.fov);
  out.angles_b = make_view_angles(std::clamp<double>(rec.frame_b.pitch, -kPi / 2, kPi / 2),
                                  rec.frame_b.yaw, rec.frame_b.fov);
  out.pose.rotation = Eigen::Quaterniond(rec.rotation_wxyz[0], rec.rotation_wxyz[1],
                                         rec.rotation_wxyz[2], rec.rotation_wxyz[3])
                          .normalized();
  out.pose.translation = {rec.translation_m[0], rec.translation_m[1],
                          rec.translation_m[2]};
  out.pose.scale_state = scale_state_from_string(rec.scale_state);
  out.mean_conf = rec.mean_conf;
  out.sigma = rec.sigma;
  out.provenance = provenance_from_string(rec.provenance);
  return out;
}

std::string manifest_line(const ManifestRecord& rec) {
  std::string out;
  out.reserve(320);
  out += "{\"schema_version\":";
  out += std::to_string(rec.schema_version);
  out += ",\"video_id\":";
  out += json_string(rec.video_id);
  out += ",\"frame_a\":";
  append_frame(out, rec.frame_a);
  out += ",\"frame_b\":";
  append_frame(out, rec.frame_b);
  out += ",\"rotation_wxyz\":[";
  for (int i = 0; i < 4; ++i) {
    if (i) out += ",";
    out += fmt_float(rec.rotation_wxyz[i]);
  }
  out += "],\"translation_m\":[";
  for (int i = 0; i < 3; ++i) {
    if (i) out += ",";
    out += fmt_float(rec.translation_m[i]);
  }
  out += "],\"mean_conf\":";
  out += fmt_float(rec.mean_conf);
  out += ",\"sigma\":";
  out += fmt_float(rec.sigma);
  out += ",\"provenance\":";
  out += json_string(rec.provenance);
  out += ",\"scale_state\":";
  out += json_string(rec.scale_state);
  out += "}";
  return out;
}

void write_manifest(const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& path) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate_record(records[i]);
    } catch (const DataError& e) {
      throw DataError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  std::vector<const ManifestRecord*> order;
  order.reserve(records.size());
  for (const ManifestRecord& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const ManifestRecord* a, const ManifestRecord* b) {
                     return std::tie(a->video_id, a->frame_a.timestamp_ms,
                                     a->frame_b.timestamp_ms, a->frame_a.yaw,
                                     a->frame_b.yaw) <
                            std::tie(b->video_id, b->frame_a.timestamp_ms,
                                     b->frame_b.timestamp_ms, b->frame_a.yaw,
                                     b->frame_b.yaw);
                   });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  for (const ManifestRecord* r : order) {
    out << manifest_line(*r) << "\n";
  }
  if (!out) throw DataError("manifest write failed: " + path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      ManifestRecord rec;
      rec.schema_version = j.at("schema_version").get<int>();
      rec.video_id = j.at("video_id").get<std::string>();
      auto read_frame = [](const json& f) {
        ManifestFrame out;
        out.timestamp_ms = f.at("timestamp_ms").get<std::int64_t>();
        out.yaw = f.at("yaw").get<float>();
        out.pitch = f.at("pitch").get<float>();
        out.fov = f.at("fov").get<float>();
        return out;
      };
      rec.frame_a = read_frame(j.at("frame_a"));
      rec.frame_b = read_frame(j.at("frame_b"));
      const json& q = j.at("rotation_wxyz");
      const json& t = j.at("translation_m");
      if (q.size() != 4 || t.size() != 3) {
        throw DataError("rotation_wxyz/translation_m of wrong arity");
      }
      for (int i = 0; i < 4; ++i) rec.rotation_wxyz[i] = q[i].get<float>();
      for (int i = 0; i < 3; ++i) rec.translation_m[i] = t[i].get<float>();
      rec.mean_conf = j.at("mean_conf").get<float>();
      rec.sigma = j.at("sigma").get<float>();
      rec.provenance = j.at("provenance").get<std::string>();
      rec.scale_state = j.at("scale_state").get<std::string>();
      validate_record(rec);
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

ValidationReport validate_manifest(const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& frames_root) {
  const std::vector<ManifestRecord> records = read_manifest(manifest_path);
  std::set<std::pair<std::string, std::int64_t>> frames;
  for (const ManifestRecord& rec : records) {
    frames.insert({rec.video_id, rec.frame_a.timestamp_ms});
    frames.insert({rec.video_id, rec.frame_b.timestamp_ms});
  }
  ValidationReport report;
  for (const auto& [video_id, ts] : frames) {
    const std::filesystem::path p =
        frames_root / video_id / (std::to_string(ts) + ".png");
    if (!std::filesystem::exists(p)) {
      ++report.missing;
      report.issues.push_back("missing: " + p.string());
      continue;
    }
    try {
      (void)load_png(p);
      ++report.ok;
    } catch (const DataError&) {
      ++report.corrupt;
      report.issues.push_back("corrupt: " + p.string());
    }
  }
  return report;
}

}  // namespace panoforge
