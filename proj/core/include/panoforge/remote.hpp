#pragma once

#include <memory>
#include <string>

#include "panoforge/pose.hpp"

namespace panoforge {

struct RemoteConfig {
  std::string endpoint;   // e.g. http://127.0.0.1:8080
  double timeout_s = 60.0;
  int retries = 3;        // additional attempts after the first
  double backoff_s = 0.25;  // doubles per retry
  int pool_size = 4;      // bounded connection pool
};

std::string base64_encode(const std::uint8_t* data, std::size_t len);

/// Client for an external pose-estimation service.
/// POST /v1/estimate with {"image_a": <base64 PNG>, "image_b": <base64 PNG>};
/// the response carries rotation_wxyz, translation, confidence and pointmap
/// (row-major arrays with dims). Connection failures, timeouts and 5xx are
/// retried with exponential backoff; 4xx and malformed payloads are fatal.
class RemoteEstimator final : public PoseEstimator {
 public:
  explicit RemoteEstimator(RemoteConfig cfg);
  ~RemoteEstimator() override;

 protected:
  PoseEstimate do_estimate(const PerspectiveView& a,
                           const PerspectiveView& b) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// POST /v1/depth with {"image": <base64 PNG>}; response {"depth": {dims, data}}.
class RemoteDepthEstimator final : public DepthEstimator {
 public:
  explicit RemoteDepthEstimator(RemoteConfig cfg);
  ~RemoteDepthEstimator() override;

 protected:
  DepthMap do_estimate_depth(const PerspectiveView& view) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace panoforge
