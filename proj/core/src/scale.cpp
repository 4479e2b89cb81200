#include "panoforge/scale.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "panoforge/errors.hpp"

namespace panoforge {

ScaleFit fit_scale(const PointMap& pointmap, const DepthMap& depth,
                   const ConfidenceMap& conf) {
  const int w = pointmap.width;
  const int h = pointmap.height;
  if (depth.map.width != w || depth.map.height != h || conf.map.width != w ||
      conf.map.height != h) {
    throw DataError("fit_scale inputs must share dimensions");
  }

  struct Sample {
    double ratio;   // D / z
    double weight;  // C * z
    double c;
    double z;
    double d;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(w) * h);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = conf.map.values[i];
    const double d = depth.map.values[i];
    if (!std::isfinite(c) || !std::isfinite(d)) {
      throw DataError("fit_scale inputs must be finite");
    }
    const Eigen::Vector3d& p = pointmap.points[i];
    if (!p.allFinite()) throw DataError("fit_scale pointmap must be finite");
    const double z = p.norm();  // distance along the pixel ray
    if (!(c > kConfidenceValidityFloor) || !(z > 0.0)) continue;
    samples.push_back(Sample{d / z, c * z, c, z, d});
  }
  if (samples.empty()) throw DataError("fit_scale found no valid pixels");

  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.ratio < b.ratio; });

  double total_weight = 0.0;
  for (const Sample& s : samples) total_weight += s.weight;

  double acc = 0.0;
  double sigma = samples.back().ratio;
  for (const Sample& s : samples) {
    acc += s.weight;
    if (acc >= total_weight / 2.0) {
      sigma = s.ratio;
      break;
    }
  }

  ScaleFit fit;
  fit.sigma = sigma;
  fit.valid_pixel_count = samples.size();
  for (const Sample& s : samples) {
    fit.objective += s.c * std::abs(sigma * s.z - s.d);
  }
  if (!(fit.sigma > 0.0)) throw DataError("fit_scale produced a nonpositive sigma");
  return fit;
}

RelativePose to_metric(const RelativePose& raw, double sigma) {
  if (raw.scale_state == ScaleState::metric) {
    throw DataError("pose is already metric (double scaling rejected)");
  }
  if (!(sigma > 0.0)) throw DataError("sigma must be positive");
  RelativePose out = raw;
  out.translation *= sigma;
  out.scale_state = ScaleState::metric;
  return out;
}

CorrespondenceRecord calibrate_record(const CorrespondenceRecord& record,
                                      const PerspectiveView& view_a,
                                      const DepthEstimator& depth_estimator,
                                      const PoseEstimate& estimate) {
  try {
    if (record.pose.scale_state == ScaleState::metric) {
      throw DataError("record is already metric");
    }
    const DepthMap depth = depth_estimator.estimate_depth(view_a);
    const ScaleFit fit = fit_scale(estimate.pointmap, depth, estimate.confidence);
    CorrespondenceRecord out = record;
    out.pose = to_metric(record.pose, fit.sigma);
    out.sigma = fit.sigma;
    return out;
  } catch (const std::exception& e) {
    throw DataError("calibrating record " + record.video_id + ":" +
                    std::to_string(record.ts_a) + ":" + std::to_string(record.ts_b) +
                    ": " + e.what());
  }
}

}  // namespace panoforge
