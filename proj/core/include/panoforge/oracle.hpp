#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "panoforge/pose.hpp"
#include "panoforge/projection.hpp"
#include "panoforge/synth.hpp"

namespace panoforge {

struct NoiseConfig {
  double rot_sigma = 0.0;    // radians, rotation perturbation
  double trans_sigma = 0.0;  // estimator units, per translation component
  double depth_sigma = 0.0;  // lognormal sigma for multiplicative depth noise
};

struct FixtureFrame {
  std::int64_t timestamp_ms = 0;
  CameraPose pose;
};

/// Ground-truth sidecar written next to synthetic fixtures: scene, camera
/// trajectory, the planted dimensionless scale s* and the oracle confidence
/// scale.
struct FixtureGroundTruth {
  std::string video_id = "synthetic";
  SceneSpec scene;
  double s_star = 1.0;
  double conf_scale = 8.0;
  NoiseConfig noise;
  int pano_width = 256;
  int pano_height = 128;
  std::vector<FixtureFrame> frames;

  const CameraPose& camera_at(std::int64_t timestamp_ms) const;
};

FixtureGroundTruth fixture_from_json_text(const std::string& text);
std::string fixture_to_json_text(const FixtureGroundTruth& gt);
FixtureGroundTruth load_fixture(const std::filesystem::path& path);
void save_fixture(const FixtureGroundTruth& gt, const std::filesystem::path& path);

/// Test double standing in for the neural pose estimator. Pose equals the
/// ground truth with translation divided by the planted scale s* (plus
/// optional noise); confidence is conf_scale times the per-pixel
/// co-visibility indicator smoothed over a 3x3 neighborhood; the pointmap
/// holds raycast intersections divided by s*.
PoseEstimate oracle_estimate(const SceneSpec& scene, const CameraPose& cam_a,
                             const CameraPose& cam_b, const PerspectiveView& view_a,
                             const PerspectiveView& view_b, const NoiseConfig& noise,
                             double s_star, double conf_scale, std::uint64_t seed);

/// Raycast ground-truth depth (distance along each pixel ray, meters) with
/// optional multiplicative lognormal noise.
DepthMap oracle_depth(const SceneSpec& scene, const CameraPose& cam,
                      const PerspectiveView& view, double depth_sigma,
                      std::uint64_t seed);

/// PoseEstimator backed by fixture ground truth. Pure given the fixture and
/// root seed: per-call noise streams derive from the call inputs, so results
/// are identical under any scheduling.
class OracleEstimator final : public PoseEstimator {
 public:
  OracleEstimator(std::shared_ptr<const FixtureGroundTruth> gt, std::uint64_t root_seed);

 protected:
  PoseEstimate do_estimate(const PerspectiveView& a,
                           const PerspectiveView& b) const override;

 private:
  std::shared_ptr<const FixtureGroundTruth> gt_;
  std::uint64_t root_seed_;
};

class OracleDepthEstimator final : public DepthEstimator {
 public:
  OracleDepthEstimator(std::shared_ptr<const FixtureGroundTruth> gt,
                       std::uint64_t root_seed);

 protected:
  DepthMap do_estimate_depth(const PerspectiveView& view) const override;

 private:
  std::shared_ptr<const FixtureGroundTruth> gt_;
  std::uint64_t root_seed_;
};

}  // namespace panoforge
