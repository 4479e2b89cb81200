#pragma once

#include <vector>

#include "panoforge/image.hpp"

namespace panoforge {

/// Per-pixel mask in [0,1] broadcast over residual channels.
struct MotionMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

/// Elementwise eps - eps_hat for one sample, h x w x c, channel-minor.
struct Residual {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  double at(int x, int y, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct LossConfig {
  double lambda = 1.0;  // auxiliary mask reward coefficient
};

/// Squared L2 norm of the masked residual: sum_ijc (r_ijc * M_ij)^2.
/// With an identity mask this is exactly the unmasked denoising objective.
double masked_loss(const Residual& residual, const MotionMask& mask);

/// -lambda * sum_ij M_ij; rewards keeping the mask non-zero.
double auxiliary_loss(const MotionMask& mask, const LossConfig& cfg);

struct LossGrads {
  double total = 0.0;
  std::vector<double> d_mask;      // dL/dM_ij = 2*M_ij*sum_c r^2 - lambda
  std::vector<double> d_residual;  // dL/dr_ijc = 2*r_ijc*M_ij^2
};

LossGrads total_loss_and_grads(const Residual& residual, const MotionMask& mask,
                               const LossConfig& cfg);

/// Per-pixel minimizer of M^2*rho - lambda*M over [0,1] with
/// rho = sum_c r^2: clamp(lambda/(2*rho), 0, 1); rho = 0 gives 1.
MotionMask optimal_mask(const Residual& residual, const LossConfig& cfg);

/// Elementwise clamp of raw decoder output into [0,1]. Rejects non-finite
/// input.
MotionMask clamp_mask(const FloatMap& raw);

}  // namespace panoforge
