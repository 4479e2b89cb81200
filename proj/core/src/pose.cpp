#include "panoforge/pose.hpp"

#include <cmath>

#include "panoforge/errors.hpp"

namespace panoforge {

const char* to_string(ScaleState s) {
  return s == ScaleState::raw ? "raw" : "metric";
}

ScaleState scale_state_from_string(const std::string& s) {
  if (s == "raw") return ScaleState::raw;
  if (s == "metric") return ScaleState::metric;
  throw DataError("unknown scale_state: " + s);
}

double mean_confidence(const ConfidenceMap& c) {
  if (c.map.values.empty()) throw DataError("empty confidence map");
  double acc = 0.0;
  for (double v : c.map.values) acc += v;
  return acc / static_cast<double>(c.map.values.size());
}

void validate_estimate(const PoseEstimate& est, int width, int height) {
  const double qn = est.pose.rotation.norm();
  if (!(std::abs(qn - 1.0) <= 1e-9)) {
    throw DataError("pose quaternion not unit norm");
  }
  if (!est.pose.translation.allFinite()) {
    throw DataError("pose translation not finite");
  }
  if (est.confidence.map.width != width || est.confidence.map.height != height ||
      est.pointmap.width != width || est.pointmap.height != height) {
    throw DataError("estimate dimensions disagree with views");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (est.confidence.map.values.size() != n || est.pointmap.points.size() != n) {
    throw DataError("estimate buffers inconsistent with dims");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double c = est.confidence.map.values[i];
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw DataError("confidence values must be finite and nonnegative");
    }
    if (c >= kConfidenceValidityFloor) {
      const Eigen::Vector3d& p = est.pointmap.points[i];
      if (!p.allFinite() || !(p.z() > 0.0)) {
        throw DataError("pointmap depth must be positive where confident");
      }
    }
  }
}

void validate_depth(const DepthMap& depth, int width, int height) {
  if (depth.map.width != width || depth.map.height != height ||
      depth.map.values.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("depth dimensions disagree with view");
  }
  for (double v : depth.map.values) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw DataError("depth values must be finite and positive");
    }
  }
}

PoseEstimate PoseEstimator::estimate(const PerspectiveView& a,
                                     const PerspectiveView& b) const {
  if (a.image.width != b.image.width || a.image.height != b.image.height) {
    throw DataError("estimate requires equal view dimensions");
  }
  PoseEstimate est = do_estimate(a, b);
  validate_estimate(est, a.image.width, a.image.height);
  return est;
}

DepthMap DepthEstimator::estimate_depth(const PerspectiveView& view) const {
  DepthMap d = do_estimate_depth(view);
  validate_depth(d, view.image.width, view.image.height);
  return d;
}

}  // namespace panoforge
