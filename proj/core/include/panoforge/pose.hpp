#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

#include "panoforge/image.hpp"
#include "panoforge/projection.hpp"

namespace panoforge {

enum class ScaleState { raw, metric };

const char* to_string(ScaleState s);
ScaleState scale_state_from_string(const std::string& s);

/// Relative pose mapping camera-a coordinates into camera-b.
/// Translation is dimensionless while raw, meters once metric.
struct RelativePose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  ScaleState scale_state = ScaleState::raw;
};

/// Per-pixel nonnegative reliability weights from the pose estimator.
struct ConfidenceMap {
  FloatMap map;
};

/// mu_c: spatial mean of the confidence map. Rejects empty maps.
double mean_confidence(const ConfidenceMap& c);

/// Per-pixel 3D scene intersections (first camera's frame, z forward,
/// dimensionless estimator units).
struct PointMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> points;

  const Eigen::Vector3d& at(int x, int y) const {
    return points[static_cast<std::size_t>(y) * width + x];
  }
};

/// Metric per-pixel depth, meters, strictly positive.
struct DepthMap {
  FloatMap map;
};

struct PoseEstimate {
  RelativePose pose;
  ConfidenceMap confidence;
  PointMap pointmap;
};

/// Pixels below this confidence are exempt from pointmap validity checks
/// and excluded from scale fitting.
inline constexpr double kConfidenceValidityFloor = 0.01;

/// Throws DataError unless quaternion normality, confidence nonnegativity,
/// dimension agreement and pointmap forward-depth positivity all hold.
void validate_estimate(const PoseEstimate& est, int width, int height);
void validate_depth(const DepthMap& depth, int width, int height);

/// Relative-pose estimator interface (the neural-estimator role). The public
/// entry enforces the output invariants regardless of implementation.
class PoseEstimator {
 public:
  virtual ~PoseEstimator() = default;

  PoseEstimate estimate(const PerspectiveView& a, const PerspectiveView& b) const;

 protected:
  virtual PoseEstimate do_estimate(const PerspectiveView& a,
                                   const PerspectiveView& b) const = 0;
};

/// Monocular metric depth estimator interface.
class DepthEstimator {
 public:
  virtual ~DepthEstimator() = default;

  DepthMap estimate_depth(const PerspectiveView& view) const;

 protected:
  virtual DepthMap do_estimate_depth(const PerspectiveView& view) const = 0;
};

}  // namespace panoforge
