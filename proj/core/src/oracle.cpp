#include "panoforge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panoforge/errors.hpp"
#include "panoforge/geometry.hpp"

namespace panoforge {

namespace {

using nlohmann::json;

std::uint64_t view_seed(std::uint64_t root, const PerspectiveView& v) {
  std::uint64_t s = hash_mix(root, v.video_id);
  s = hash_mix(s, static_cast<std::uint64_t>(v.timestamp_ms));
  s = hash_mix(s, v.angles.pitch);
  s = hash_mix(s, v.angles.yaw);
  s = hash_mix(s, v.angles.fov);
  return s;
}

}  // namespace

const CameraPose& FixtureGroundTruth::camera_at(std::int64_t timestamp_ms) const {
  for (const FixtureFrame& f : frames) {
    if (f.timestamp_ms == timestamp_ms) return f.pose;
  }
  throw DataError("fixture has no camera at timestamp " + std::to_string(timestamp_ms));
}

FixtureGroundTruth fixture_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("fixture JSON parse error: ") + e.what());
  }
  try {
    FixtureGroundTruth gt;
    gt.video_id = j.at("video_id").get<std::string>();
    gt.scene = scene_from_json_text(j.at("scene").dump());
    gt.s_star = j.at("s_star").get<double>();
    gt.conf_scale = j.value("conf_scale", 8.0);
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      gt.noise.rot_sigma = n.value("rot_sigma", 0.0);
      gt.noise.trans_sigma = n.value("trans_sigma", 0.0);
      gt.noise.depth_sigma = n.value("depth_sigma", 0.0);
    }
    gt.pano_width = j.at("pano").at("width").get<int>();
    gt.pano_height = j.at("pano").at("height").get<int>();
    for (const json& f : j.at("frames")) {
      FixtureFrame frame;
      frame.timestamp_ms = f.at("timestamp_ms").get<std::int64_t>();
      const json& pos = f.at("position");
      frame.pose.position = {pos[0].get<double>(), pos[1].get<double>(),
                             pos[2].get<double>()};
      const json& q = f.at("orientation_wxyz");
      frame.pose.orientation = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                                  q[2].get<double>(), q[3].get<double>())
                                   .normalized();
      gt.frames.push_back(frame);
    }
    if (!(gt.s_star > 0.0)) throw DataError("fixture s_star must be positive");
    return gt;
  } catch (const json::exception& e) {
    throw DataError(std::string("fixture JSON schema error: ") + e.what());
  }
}

std::string fixture_to_json_text(const FixtureGroundTruth& gt) {
  json j;
  j["video_id"] = gt.video_id;
  j["scene"] = json::parse(scene_to_json_text(gt.scene));
  j["s_star"] = gt.s_star;
  j["conf_scale"] = gt.conf_scale;
  j["noise"] = {{"rot_sigma", gt.noise.rot_sigma},
                {"trans_sigma", gt.noise.trans_sigma},
                {"depth_sigma", gt.noise.depth_sigma}};
  j["pano"] = {{"width", gt.pano_width}, {"height", gt.pano_height}};
  json frames = json::array();
  for (const FixtureFrame& f : gt.frames) {
    json fr;
    fr["timestamp_ms"] = f.timestamp_ms;
    fr["position"] = {f.pose.position.x(), f.pose.position.y(), f.pose.position.z()};
    const Eigen::Quaterniond q = canonical_quaternion(f.pose.orientation);
    fr["orientation_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
    frames.push_back(fr);
  }
  j["frames"] = frames;
  return j.dump(2) + "\n";
}

FixtureGroundTruth load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fixture: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fixture_from_json_text(buf.str());
}

void save_fixture(const FixtureGroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write fixture: " + path.string());
  out << fixture_to_json_text(gt);
}

PoseEstimate oracle_estimate(const SceneSpec& scene, const CameraPose& cam_a,
                             const CameraPose& cam_b, const PerspectiveView& view_a,
                             const PerspectiveView& view_b, const NoiseConfig& noise,
                             double s_star, double conf_scale, std::uint64_t seed) {
  if (view_a.image.width != view_b.image.width ||
      view_a.image.height != view_b.image.height) {
    throw DataError("oracle views must share dimensions");
  }
  if (!(s_star > 0.0)) throw DataError("planted scale must be positive");
  const int w = view_a.image.width;
  const int h = view_a.image.height;

  PoseEstimate est;
  est.pointmap.width = w;
  est.pointmap.height = h;
  est.pointmap.points.resize(static_cast<std::size_t>(w) * h);

  const Eigen::Matrix3d rot_a = view_rotation(cam_a, view_a.angles);
  const Eigen::Matrix3d rot_b_t = view_rotation(cam_b, view_b.angles).transpose();
  const double tan_ha = std::tan(view_a.angles.fov / 2.0);
  const double tan_va = std::tan(vertical_fov(view_a.angles.fov, w, h) / 2.0);
  const double tan_hb = std::tan(view_b.angles.fov / 2.0);
  const double tan_vb =
      std::tan(vertical_fov(view_b.angles.fov, w, h) / 2.0);

  std::vector<double> indicator(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    const double ny = (2.0 * (y + 0.5) / h - 1.0) * tan_va;
    for (int x = 0; x < w; ++x) {
      const double nx = (2.0 * (x + 0.5) / w - 1.0) * tan_ha;
      const Eigen::Vector3d d_cam = Eigen::Vector3d(nx, ny, 1.0).normalized();
      const Eigen::Vector3d d_world = rot_a * d_cam;
      const RayHit hit = raycast(scene, cam_a.position, d_world);
      est.pointmap.points[static_cast<std::size_t>(y) * w + x] =
          d_cam * (hit.t / s_star);

      // co-visibility indicator: in view-b frustum and unoccluded
      const Eigen::Vector3d rel = hit.point - cam_b.position;
      const Eigen::Vector3d local = rot_b_t * rel;
      bool vis = local.z() > 1e-9 && std::abs(local.x() / local.z()) <= tan_hb &&
                 std::abs(local.y() / local.z()) <= tan_vb;
      if (vis) {
        const double dist = rel.norm();
        if (dist > 1e-9) {
          const RayHit occ = raycast(scene, cam_b.position, rel / dist);
          vis = occ.t >= dist * (1.0 - 1e-6) - 1e-6;
        }
      }
      if (vis) indicator[static_cast<std::size_t>(y) * w + x] = 1.0;
    }
  }

  // 3x3 box smoothing with border renormalization
  est.confidence.map = make_float_map(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      int cnt = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          acc += indicator[static_cast<std::size_t>(yy) * w + xx];
          ++cnt;
        }
      }
      est.confidence.map.at(x, y) = conf_scale * acc / cnt;
    }
  }

  RelativePose gt_pose =
      ground_truth_view_pose(cam_a, view_a.angles, cam_b, view_b.angles);
  est.pose.rotation = gt_pose.rotation;
  est.pose.translation = gt_pose.translation / s_star;
  est.pose.scale_state = ScaleState::raw;

  if (noise.rot_sigma > 0.0 || noise.trans_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (noise.rot_sigma > 0.0) {
      Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
      if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitX();
      axis.normalize();
      const double angle = gauss(rng) * noise.rot_sigma;
      est.pose.rotation = canonical_quaternion(
          Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)) * est.pose.rotation);
    }
    if (noise.trans_sigma > 0.0) {
      est.pose.translation += Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)) *
                              noise.trans_sigma;
    }
  }
  return est;
}

DepthMap oracle_depth(const SceneSpec& scene, const CameraPose& cam,
                      const PerspectiveView& view, double depth_sigma,
                      std::uint64_t seed) {
  const int w = view.image.width;
  const int h = view.image.height;
  DepthMap depth;
  depth.map = make_float_map(w, h);
  const Eigen::Matrix3d rot = view_rotation(cam, view.angles);
  const double tan_h = std::tan(view.angles.fov / 2.0);
  const double tan_v = std::tan(vertical_fov(view.angles.fov, w, h) / 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int y = 0; y < h; ++y) {
    const double ny = (2.0 * (y + 0.5) / h - 1.0) * tan_v;
    for (int x = 0; x < w; ++x) {
      const double nx = (2.0 * (x + 0.5) / w - 1.0) * tan_h;
      const Eigen::Vector3d dir = (rot * Eigen::Vector3d(nx, ny, 1.0)).normalized();
      double t = raycast(scene, cam.position, dir).t;
      if (depth_sigma > 0.0) t *= std::exp(gauss(rng) * depth_sigma);
      depth.map.at(x, y) = t;
    }
  }
  return depth;
}

OracleEstimator::OracleEstimator(std::shared_ptr<const FixtureGroundTruth> gt,
                                 std::uint64_t root_seed)
    : gt_(std::move(gt)), root_seed_(root_seed) {
  if (!gt_) throw DataError("oracle estimator needs fixture ground truth");
}

PoseEstimate OracleEstimator::do_estimate(const PerspectiveView& a,
                                          const PerspectiveView& b) const {
  if (a.video_id != gt_->video_id || b.video_id != gt_->video_id) {
    throw DataError("view does not belong to the oracle fixture video");
  }
  const CameraPose& cam_a = gt_->camera_at(a.timestamp_ms);
  const CameraPose& cam_b = gt_->camera_at(b.timestamp_ms);
  const std::uint64_t seed = hash_mix(view_seed(root_seed_, a), view_seed(0, b));
  return oracle_estimate(gt_->scene, cam_a, cam_b, a, b, gt_->noise, gt_->s_star,
                         gt_->conf_scale, seed);
}

OracleDepthEstimator::OracleDepthEstimator(std::shared_ptr<const FixtureGroundTruth> gt,
                                           std::uint64_t root_seed)
    : gt_(std::move(gt)), root_seed_(root_seed) {
  if (!gt_) throw DataError("oracle depth estimator needs fixture ground truth");
}

DepthMap OracleDepthEstimator::do_estimate_depth(const PerspectiveView& view) const {
  if (view.video_id != gt_->video_id) {
    throw DataError("view does not belong to the oracle fixture video");
  }
  const CameraPose& cam = gt_->camera_at(view.timestamp_ms);
  const std::uint64_t seed = hash_mix(view_seed(root_seed_, view), std::uint64_t{0x6465707468});
  return oracle_depth(gt_->scene, cam, view, gt_->noise.depth_sigma, seed);
}

}  // namespace panoforge
