#include "panoforge/loss.hpp"

#include <algorithm>
#include <cmath>

#include "panoforge/errors.hpp"

namespace panoforge {

namespace {

void check_dims(const Residual& residual, const MotionMask& mask) {
  if (residual.width != mask.width || residual.height != mask.height) {
    throw DataError("mask dimensions must match residual spatial dimensions");
  }
  if (residual.channels <= 0 ||
      residual.values.size() != static_cast<std::size_t>(residual.width) *
                                    residual.height * residual.channels ||
      mask.values.size() !=
          static_cast<std::size_t>(mask.width) * mask.height) {
    throw DataError("inconsistent residual or mask buffers");
  }
}

}  // namespace

double masked_loss(const Residual& residual, const MotionMask& mask) {
  check_dims(residual, mask);
  double acc = 0.0;
  const int c = residual.channels;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    const double m = mask.values[i];
    for (int k = 0; k < c; ++k) {
      const double r = residual.values[i * c + k];
      acc += (r * m) * (r * m);
    }
  }
  return acc;
}

double auxiliary_loss(const MotionMask& mask, const LossConfig& cfg) {
  if (cfg.lambda < 0.0) throw DataError("lambda must be nonnegative");
  double acc = 0.0;
  for (double m : mask.values) acc += m;
  return -cfg.lambda * acc;
}

LossGrads total_loss_and_grads(const Residual& residual, const MotionMask& mask,
                               const LossConfig& cfg) {
  check_dims(residual, mask);
  if (cfg.lambda < 0.0) throw DataError("lambda must be nonnegative");
  LossGrads g;
  g.d_mask.resize(mask.values.size());
  g.d_residual.resize(residual.values.size());
  const int c = residual.channels;
  double acc = 0.0;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    const double m = mask.values[i];
    double rho = 0.0;
    for (int k = 0; k < c; ++k) {
      const double r = residual.values[i * c + k];
      rho += r * r;
      g.d_residual[i * c + k] = 2.0 * r * m * m;
      acc += (r * m) * (r * m);
    }
    g.d_mask[i] = 2.0 * m * rho - cfg.lambda;
    acc -= cfg.lambda * m;
  }
  g.total = acc;
  return g;
}

MotionMask optimal_mask(const Residual& residual, const LossConfig& cfg) {
  if (cfg.lambda < 0.0) throw DataError("lambda must be nonnegative");
  MotionMask mask;
  mask.width = residual.width;
  mask.height = residual.height;
  mask.values.resize(static_cast<std::size_t>(residual.width) * residual.height);
  const int c = residual.channels;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    double rho = 0.0;
    for (int k = 0; k < c; ++k) {
      const double r = residual.values[i * c + k];
      rho += r * r;
    }
    mask.values[i] = rho == 0.0 ? 1.0 : std::clamp(cfg.lambda / (2.0 * rho), 0.0, 1.0);
  }
  return mask;
}

MotionMask clamp_mask(const FloatMap& raw) {
  MotionMask mask;
  mask.width = raw.width;
  mask.height = raw.height;
  mask.values.reserve(raw.values.size());
  for (double v : raw.values) {
    if (!std::isfinite(v)) throw DataError("mask input must be finite");
    mask.values.push_back(std::clamp(v, 0.0, 1.0));
  }
  return mask;
}

}  // namespace panoforge
