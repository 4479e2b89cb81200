#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>

namespace panoforge {

inline constexpr double kPi = 3.14159265358979323846;

/// Pitch/yaw/fov of a perspective view cut from a panorama.
/// pitch in [-pi/2, pi/2], yaw normalized to [0, 2*pi), fov (horizontal) in (0, pi).
struct ViewAngles {
  double pitch = 0.0;
  double yaw = 0.0;
  double fov = kPi / 2.0;
};

/// Wraps yaw into [0, 2*pi) and validates pitch/fov ranges. Throws DataError.
ViewAngles make_view_angles(double pitch, double yaw, double fov);

double wrap_yaw(double yaw);

// World convention: right-handed, +z up. Longitude 0 / latitude 0 is +x.
// u in [0,1) maps longitude (u-0.5)*2*pi, v in [0,1] maps latitude (0.5-v)*pi.
Eigen::Vector3d equirect_uv_to_dir(double u, double v);

// Inverse of equirect_uv_to_dir; u wraps modulo 1. At the poles u = 0.5.
Eigen::Vector2d dir_to_equirect_uv(const Eigen::Vector3d& dir);

// Yaw about +z first, then pitch about the rotated lateral axis.
// Maps view-local directions into the panorama frame; forward (+x) goes to
// (cos(pitch)cos(yaw), cos(pitch)sin(yaw), sin(pitch)).
Eigen::Matrix3d rotation_from_angles(const ViewAngles& angles);

// Pinhole camera frame: x right, y down, z forward (optical axis).
// Maps camera axes into the identity view frame: z->+x, x->-y, y->-z.
Eigen::Matrix3d camera_basis();

// Unit ray through pixel center (px, py) of an h x w view with the given
// horizontal fov. Vertical fov derives from the aspect ratio.
Eigen::Vector3d pixel_ray(double px, double py, int width, int height, double hfov);

double vertical_fov(double hfov, int width, int height);

// Canonical sign (first nonzero of w,x,y,z positive) so serialized
// quaternions are reproducible.
Eigen::Quaterniond canonical_quaternion(const Eigen::Quaterniond& q);

// Deterministic seed mixing for per-call noise streams.
std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_mix(std::uint64_t seed, const std::string& value);
std::uint64_t hash_mix(std::uint64_t seed, double value);

}  // namespace panoforge
