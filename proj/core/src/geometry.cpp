#include "panoforge/geometry.hpp"

#include <cmath>
#include <cstring>

#include "panoforge/errors.hpp"

namespace panoforge {

double wrap_yaw(double yaw) {
  double w = std::fmod(yaw, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;  // fmod can land exactly on 2*pi after the add
  return w;
}

ViewAngles make_view_angles(double pitch, double yaw, double fov) {
  if (!std::isfinite(pitch) || !std::isfinite(yaw) || !std::isfinite(fov)) {
    throw DataError("view angles must be finite");
  }
  if (pitch < -kPi / 2.0 || pitch > kPi / 2.0) {
    throw DataError("pitch out of [-pi/2, pi/2]");
  }
  if (fov <= 0.0 || fov >= kPi) {
    throw DataError("fov out of (0, pi)");
  }
  return ViewAngles{pitch, wrap_yaw(yaw), fov};
}

Eigen::Vector3d equirect_uv_to_dir(double u, double v) {
  if (!(u >= 0.0 && u < 1.0) || !(v >= 0.0 && v <= 1.0)) {
    throw DataError("equirect uv out of range");
  }
  const double lon = (u - 0.5) * 2.0 * kPi;
  const double lat = (0.5 - v) * kPi;
  const double cl = std::cos(lat);
  return {cl * std::cos(lon), cl * std::sin(lon), std::sin(lat)};
}

Eigen::Vector2d dir_to_equirect_uv(const Eigen::Vector3d& dir) {
  const double n = dir.norm();
  if (n < 1e-12) throw DataError("zero direction vector");
  const Eigen::Vector3d d = dir / n;
  double u;
  if (d.x() * d.x() + d.y() * d.y() < 1e-24) {
    u = 0.5;  // pole convention
  } else {
    u = std::atan2(d.y(), d.x()) / (2.0 * kPi) + 0.5;
    if (u >= 1.0) u -= 1.0;
    if (u < 0.0) u += 1.0;
  }
  const double lat = std::asin(std::clamp(d.z(), -1.0, 1.0));
  const double v = 0.5 - lat / kPi;
  return {u, std::clamp(v, 0.0, 1.0)};
}

Eigen::Matrix3d rotation_from_angles(const ViewAngles& angles) {
  const Eigen::AngleAxisd yaw(angles.yaw, Eigen::Vector3d::UnitZ());
  const Eigen::AngleAxisd pitch(-angles.pitch, Eigen::Vector3d::UnitY());
  return (yaw * pitch).toRotationMatrix();
}

Eigen::Matrix3d camera_basis() {
  Eigen::Matrix3d b;
  // columns: image of camera x (right), y (down), z (forward)
  b.col(0) = -Eigen::Vector3d::UnitY();
  b.col(1) = -Eigen::Vector3d::UnitZ();
  b.col(2) = Eigen::Vector3d::UnitX();
  return b;
}

double vertical_fov(double hfov, int width, int height) {
  return 2.0 * std::atan(std::tan(hfov / 2.0) * static_cast<double>(height) /
                         static_cast<double>(width));
}

Eigen::Vector3d pixel_ray(double px, double py, int width, int height, double hfov) {
  const double vfov = vertical_fov(hfov, width, height);
  const double x = (2.0 * (px + 0.5) / width - 1.0) * std::tan(hfov / 2.0);
  const double y = (2.0 * (py + 0.5) / height - 1.0) * std::tan(vfov / 2.0);
  return Eigen::Vector3d(x, y, 1.0).normalized();
}

Eigen::Quaterniond canonical_quaternion(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q.normalized();
  const double c[4] = {out.w(), out.x(), out.y(), out.z()};
  for (double v : c) {
    if (v > 0.0) break;
    if (v < 0.0) {
      out.coeffs() = -out.coeffs();
      break;
    }
  }
  return out;
}

std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t value) {
  // splitmix64 step over the running state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL + value;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_mix(std::uint64_t seed, const std::string& value) {
  std::uint64_t h = seed;
  for (unsigned char c : value) h = hash_mix(h, static_cast<std::uint64_t>(c) + 0x100);
  return hash_mix(h, value.size());
}

std::uint64_t hash_mix(std::uint64_t seed, double value) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  return hash_mix(seed, bits);
}

}  // namespace panoforge
