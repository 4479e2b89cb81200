#pragma once

#include "panoforge/pose.hpp"
#include "panoforge/search.hpp"

namespace panoforge {

struct ScaleFit {
  double sigma = 1.0;       // meters per estimator unit
  double objective = 0.0;   // weighted L1 objective value at sigma
  std::size_t valid_pixel_count = 0;
};

/// Minimizes sum_ij C_ij * |sigma * z_ij - D_ij| over pixels with positive
/// pointmap depth and confidence above the validity floor, where z_ij is the
/// distance of pointmap entry ij along its pixel ray. Solved in closed form
/// as the weighted median of ratios D/z with weights C*z; median ties break
/// toward the lower ratio.
ScaleFit fit_scale(const PointMap& pointmap, const DepthMap& depth,
                   const ConfidenceMap& conf);

/// Scales the translation into meters. Rejects already-metric input.
RelativePose to_metric(const RelativePose& raw, double sigma);

/// Re-estimates depth for view_a, fits sigma against the pair's pointmap,
/// and returns the record with a metric pose and the fitted sigma stored.
CorrespondenceRecord calibrate_record(const CorrespondenceRecord& record,
                                      const PerspectiveView& view_a,
                                      const DepthEstimator& depth_estimator,
                                      const PoseEstimate& estimate);

}  // namespace panoforge
