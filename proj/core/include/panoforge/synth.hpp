#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "panoforge/geometry.hpp"
#include "panoforge/image.hpp"
#include "panoforge/pose.hpp"
#include "panoforge/projection.hpp"

namespace panoforge {

struct SpherePrim {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
  Eigen::Vector3d color = {0.8, 0.2, 0.2};
};

struct BoxPrim {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
  Eigen::Vector3d color = {0.2, 0.8, 0.2};
};

using Primitive = std::variant<SpherePrim, BoxPrim>;

/// Axis-aligned room interior. Wall order: -x, +x, -y, +y, floor (-z),
/// ceiling (+z). Colors are linear RGB in [0,1], modulated by a 3D
/// checkerboard of the given cell size.
struct RoomSpec {
  Eigen::Vector3d min = {-5.0, -5.0, 0.0};
  Eigen::Vector3d max = {5.0, 5.0, 4.0};
  double checker_size = 0.5;
  std::array<Eigen::Vector3d, 6> wall_colors = {
      Eigen::Vector3d{0.85, 0.55, 0.35}, Eigen::Vector3d{0.35, 0.55, 0.85},
      Eigen::Vector3d{0.55, 0.85, 0.35}, Eigen::Vector3d{0.85, 0.35, 0.55},
      Eigen::Vector3d{0.45, 0.45, 0.45}, Eigen::Vector3d{0.8, 0.8, 0.75}};
};

struct SceneSpec {
  RoomSpec room;
  std::vector<Primitive> primitives;
  std::uint64_t seed = 1;
};

struct CameraPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// Throws DataError if primitives poke outside the room or extents are
/// degenerate.
void validate_scene(const SceneSpec& scene);

SceneSpec scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const SceneSpec& scene);
SceneSpec load_scene(const std::filesystem::path& path);

/// A compact indoor scene with a couple of primitives; the stock test scene.
SceneSpec make_default_scene();

struct RayHit {
  double t = 0.0;              // distance along the unit ray, meters
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  int surface = -1;            // 0..5 room walls, 6+i primitive i
};

/// Nearest hit of a unit-direction ray from inside the room. Always hits
/// (the room is closed).
RayHit raycast(const SceneSpec& scene, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& dir);

Eigen::Vector3d shade(const SceneSpec& scene, const RayHit& hit,
                      const Eigen::Vector3d& dir);

struct RenderResult {
  Image image;
  FloatMap depth;  // per-pixel hit distance, meters
};

/// Equirectangular render: per-pixel ray from equirect_uv_to_dir rotated by
/// the camera orientation. W must equal 2H.
RenderResult render_equirect(const SceneSpec& scene, const CameraPose& cam, int width,
                             int height);

/// Direct pinhole raycast of the same scene (the projection oracle and the
/// ground-truth depth source).
RenderResult render_perspective(const SceneSpec& scene, const CameraPose& cam,
                                const ViewAngles& angles, int height, int width);

enum class TrajectoryKind { line, loop };
TrajectoryKind trajectory_kind_from_string(const std::string& s);

/// Camera poses at 1-second spacing with fixed (identity) heading.
/// line: constant velocity along +x through the room center.
/// loop: circle in the horizontal plane closing onto the start.
/// Throws DataError if the path leaves the room interior.
std::vector<CameraPose> make_trajectory(const SceneSpec& scene, int n,
                                        TrajectoryKind kind, double speed_mps);

/// World rotation of a view camera (columns map camera x-right/y-down/
/// z-forward into world).
Eigen::Matrix3d view_rotation(const CameraPose& cam, const ViewAngles& angles);

/// Ground-truth pose mapping view-a camera coordinates into view-b.
/// Translation in meters (metric).
RelativePose ground_truth_view_pose(const CameraPose& cam_a, const ViewAngles& angles_a,
                                    const CameraPose& cam_b, const ViewAngles& angles_b);

/// True when `point` is inside view-b's frustum (square aspect unless dims
/// given) and unoccluded from its camera center.
bool point_visible_from(const SceneSpec& scene, const Eigen::Vector3d& point,
                        const CameraPose& cam, const ViewAngles& angles, int width,
                        int height);

/// Monte-Carlo fraction of view-a scene points visible from view-b.
/// Deterministic given the scene seed and call arguments; assumes square
/// view aspect.
double covisibility(const SceneSpec& scene, const CameraPose& cam_a,
                    const CameraPose& cam_b, const ViewAngles& angles_a,
                    const ViewAngles& angles_b, int samples);

}  // namespace panoforge
