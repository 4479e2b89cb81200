#include "panoforge/projection.hpp"

#include <cmath>

#include "panoforge/errors.hpp"

namespace panoforge {

PanoFrame make_pano_frame(std::string video_id, std::int64_t timestamp_ms, Image image) {
  if (image.width != 2 * image.height || image.height <= 0) {
    throw DataError("equirectangular frame must satisfy W = 2H");
  }
  if (timestamp_ms < 0) throw DataError("timestamp_ms must be nonnegative");
  return PanoFrame{std::move(video_id), timestamp_ms, std::move(image)};
}

PerspectiveView project(const PanoFrame& pano, const ViewAngles& angles, int out_h,
                        int out_w) {
  if (out_h <= 0 || out_w <= 0) throw DataError("view dimensions must be positive");
  if (pano.image.width != 2 * pano.image.height || pano.image.empty()) {
    throw DataError("invalid panorama raster");
  }

  PerspectiveView view;
  view.video_id = pano.video_id;
  view.timestamp_ms = pano.timestamp_ms;
  view.angles = make_view_angles(angles.pitch, angles.yaw, angles.fov);
  view.image.width = out_w;
  view.image.height = out_h;
  view.image.pixels.resize(static_cast<std::size_t>(out_w) * out_h * 3);

  const Eigen::Matrix3d rot = rotation_from_angles(view.angles) * camera_basis();
  const double tan_h = std::tan(view.angles.fov / 2.0);
  const double tan_v = std::tan(vertical_fov(view.angles.fov, out_w, out_h) / 2.0);

  std::uint8_t* out = view.image.pixels.data();
  for (int py = 0; py < out_h; ++py) {
    const double ny = (2.0 * (py + 0.5) / out_h - 1.0) * tan_v;
    for (int px = 0; px < out_w; ++px) {
      const double nx = (2.0 * (px + 0.5) / out_w - 1.0) * tan_h;
      const Eigen::Vector3d dir = rot * Eigen::Vector3d(nx, ny, 1.0);
      const Eigen::Vector2d uv = dir_to_equirect_uv(dir);
      double rgb[3];
      sample_equirect_bilinear(pano.image, uv.x(), uv.y(), rgb);
      for (int c = 0; c < 3; ++c) {
        *out++ = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[c], 0.0, 255.0)));
      }
    }
  }
  return view;
}

std::array<PerspectiveView, 4> cardinal_views(const PanoFrame& pano, double fov,
                                              int out_h, int out_w) {
  return {project(pano, ViewAngles{0.0, kCardinalYaws[0], fov}, out_h, out_w),
          project(pano, ViewAngles{0.0, kCardinalYaws[1], fov}, out_h, out_w),
          project(pano, ViewAngles{0.0, kCardinalYaws[2], fov}, out_h, out_w),
          project(pano, ViewAngles{0.0, kCardinalYaws[3], fov}, out_h, out_w)};
}

}  // namespace panoforge
