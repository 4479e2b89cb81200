#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "panoforge/geometry.hpp"
#include "panoforge/image.hpp"

namespace panoforge {

/// One equirectangular video frame. Width must be exactly twice the height.
struct PanoFrame {
  std::string video_id;
  std::int64_t timestamp_ms = 0;
  Image image;
};

PanoFrame make_pano_frame(std::string video_id, std::int64_t timestamp_ms, Image image);

/// Pinhole view extracted from a panorama at (pitch, yaw, fov).
struct PerspectiveView {
  std::string video_id;
  std::int64_t timestamp_ms = 0;
  ViewAngles angles;
  Image image;
};

/// Cardinal yaws of the four-view extraction, in emission order.
inline constexpr std::array<double, 4> kCardinalYaws = {0.0, kPi / 2.0, kPi,
                                                        3.0 * kPi / 2.0};

/// Reprojects the panorama into a pinhole view: each output pixel ray is
/// rotated by rotation_from_angles and bilinearly sampled from the pano
/// (horizontal wrap, vertical clamp).
PerspectiveView project(const PanoFrame& pano, const ViewAngles& angles, int out_h,
                        int out_w);

/// The four views at yaw {0, pi/2, pi, 3*pi/2}, pitch 0, in that order.
std::array<PerspectiveView, 4> cardinal_views(const PanoFrame& pano, double fov,
                                              int out_h, int out_w);

}  // namespace panoforge
