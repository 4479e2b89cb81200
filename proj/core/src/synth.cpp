#include "panoforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panoforge/errors.hpp"

namespace panoforge {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOcclusionEps = 1e-6;

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("expected 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to_json(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

// Exit distance of a ray starting inside an axis-aligned box, and the wall id.
double room_exit(const RoomSpec& room, const Eigen::Vector3d& o,
                 const Eigen::Vector3d& d, int* wall) {
  double best = kInf;
  int best_wall = -1;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] > 0.0) {
      const double t = (room.max[axis] - o[axis]) / d[axis];
      if (t < best) {
        best = t;
        best_wall = 2 * axis + 1;
      }
    } else if (d[axis] < 0.0) {
      const double t = (room.min[axis] - o[axis]) / d[axis];
      if (t < best) {
        best = t;
        best_wall = 2 * axis;
      }
    }
  }
  *wall = best_wall;
  return best;
}

// Smallest positive intersection with a sphere (handles inside origins).
double sphere_hit(const SpherePrim& s, const Eigen::Vector3d& o,
                  const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > 1e-12) return t0;
  const double t1 = -b + sq;
  if (t1 > 1e-12) return t1;
  return kInf;
}

// Slab method, entry intersection for outside origins.
double box_hit(const BoxPrim& bx, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  double tmin = 0.0;
  double tmax = kInf;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < bx.min[axis] || o[axis] > bx.max[axis]) return kInf;
      continue;
    }
    double t0 = (bx.min[axis] - o[axis]) / d[axis];
    double t1 = (bx.max[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return kInf;
  }
  if (tmin > 1e-12) return tmin;
  if (tmax > 1e-12) return tmax;
  return kInf;
}

bool inside_primitive(const Primitive& prim, const Eigen::Vector3d& p, double margin) {
  if (const auto* s = std::get_if<SpherePrim>(&prim)) {
    return (p - s->center).norm() < s->radius + margin;
  }
  const auto& b = std::get<BoxPrim>(prim);
  for (int a = 0; a < 3; ++a) {
    if (p[a] < b.min[a] - margin || p[a] > b.max[a] + margin) return false;
  }
  return true;
}

bool inside_room(const RoomSpec& room, const Eigen::Vector3d& p, double margin) {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < room.min[a] + margin || p[a] > room.max[a] - margin) return false;
  }
  return true;
}

}  // namespace

void validate_scene(const SceneSpec& scene) {
  for (int a = 0; a < 3; ++a) {
    if (!(scene.room.max[a] > scene.room.min[a])) {
      throw DataError("room extents must be positive");
    }
  }
  if (!(scene.room.checker_size > 0.0)) throw DataError("checker_size must be positive");
  for (const Primitive& prim : scene.primitives) {
    if (const auto* s = std::get_if<SpherePrim>(&prim)) {
      if (!(s->radius > 0.0)) throw DataError("sphere radius must be positive");
      for (int a = 0; a < 3; ++a) {
        if (s->center[a] - s->radius < scene.room.min[a] ||
            s->center[a] + s->radius > scene.room.max[a]) {
          throw DataError("sphere primitive outside room");
        }
      }
    } else {
      const auto& b = std::get<BoxPrim>(prim);
      for (int a = 0; a < 3; ++a) {
        if (!(b.max[a] > b.min[a])) throw DataError("box extents must be positive");
        if (b.min[a] < scene.room.min[a] || b.max[a] > scene.room.max[a]) {
          throw DataError("box primitive outside room");
        }
      }
    }
  }
}

SceneSpec scene_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("scene JSON parse error: ") + e.what());
  }
  try {
    SceneSpec scene;
    const json& room = j.at("room");
    scene.room.min = vec3_from_json(room.at("min"));
    scene.room.max = vec3_from_json(room.at("max"));
    scene.room.checker_size = room.value("checker_size", 0.5);
    if (room.contains("colors")) {
      const json& cols = room.at("colors");
      if (!cols.is_array() || cols.size() != 6) {
        throw DataError("room.colors must list 6 wall colors");
      }
      for (int i = 0; i < 6; ++i) scene.room.wall_colors[i] = vec3_from_json(cols[i]);
    }
    scene.seed = j.value("seed", 1ULL);
    if (j.contains("primitives")) {
      for (const json& p : j.at("primitives")) {
        const std::string type = p.at("type").get<std::string>();
        if (type == "sphere") {
          SpherePrim s;
          s.center = vec3_from_json(p.at("center"));
          s.radius = p.at("radius").get<double>();
          if (p.contains("color")) s.color = vec3_from_json(p.at("color"));
          scene.primitives.emplace_back(s);
        } else if (type == "box") {
          BoxPrim b;
          b.min = vec3_from_json(p.at("min"));
          b.max = vec3_from_json(p.at("max"));
          if (p.contains("color")) b.color = vec3_from_json(p.at("color"));
          scene.primitives.emplace_back(b);
        } else {
          throw DataError("unknown primitive type: " + type);
        }
      }
    }
    validate_scene(scene);
    return scene;
  } catch (const json::exception& e) {
    throw DataError(std::string("scene JSON schema error: ") + e.what());
  }
}

std::string scene_to_json_text(const SceneSpec& scene) {
  json j;
  j["room"]["min"] = vec3_to_json(scene.room.min);
  j["room"]["max"] = vec3_to_json(scene.room.max);
  j["room"]["checker_size"] = scene.room.checker_size;
  json cols = json::array();
  for (const auto& c : scene.room.wall_colors) cols.push_back(vec3_to_json(c));
  j["room"]["colors"] = cols;
  j["seed"] = scene.seed;
  json prims = json::array();
  for (const Primitive& prim : scene.primitives) {
    json p;
    if (const auto* s = std::get_if<SpherePrim>(&prim)) {
      p["type"] = "sphere";
      p["center"] = vec3_to_json(s->center);
      p["radius"] = s->radius;
      p["color"] = vec3_to_json(s->color);
    } else {
      const auto& b = std::get<BoxPrim>(prim);
      p["type"] = "box";
      p["min"] = vec3_to_json(b.min);
      p["max"] = vec3_to_json(b.max);
      p["color"] = vec3_to_json(b.color);
    }
    prims.push_back(p);
  }
  j["primitives"] = prims;
  return j.dump(2) + "\n";
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scene_from_json_text(buf.str());
}

SceneSpec make_default_scene() {
  SceneSpec scene;
  scene.room.min = {-6.0, -6.0, 0.0};
  scene.room.max = {6.0, 6.0, 4.0};
  scene.room.checker_size = 1.0;
  scene.seed = 1;
  SpherePrim ball;
  ball.center = {2.5, -2.0, 1.0};
  ball.radius = 0.8;
  ball.color = {0.9, 0.3, 0.2};
  BoxPrim crate;
  crate.min = {-3.5, 1.5, 0.0};
  crate.max = {-2.0, 3.0, 1.2};
  crate.color = {0.25, 0.4, 0.85};
  scene.primitives = {ball, crate};
  validate_scene(scene);
  return scene;
}

RayHit raycast(const SceneSpec& scene, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& dir) {
  int wall = -1;
  double best = room_exit(scene.room, origin, dir, &wall);
  int surface = wall;
  const int n = static_cast<int>(scene.primitives.size());
  for (int i = 0; i < n; ++i) {
    const Primitive& prim = scene.primitives[i];
    double t;
    if (const auto* s = std::get_if<SpherePrim>(&prim)) {
      t = sphere_hit(*s, origin, dir);
    } else {
      t = box_hit(std::get<BoxPrim>(prim), origin, dir);
    }
    if (t < best) {
      best = t;
      surface = 6 + i;
    }
  }
  RayHit hit;
  hit.t = best;
  hit.point = origin + dir * best;
  hit.surface = surface;
  return hit;
}

Eigen::Vector3d shade(const SceneSpec& scene, const RayHit& hit,
                      const Eigen::Vector3d& dir) {
  Eigen::Vector3d base;
  if (hit.surface >= 6) {
    const Primitive& prim = scene.primitives[hit.surface - 6];
    base = std::holds_alternative<SpherePrim>(prim)
               ? std::get<SpherePrim>(prim).color
               : std::get<BoxPrim>(prim).color;
  } else if (hit.surface >= 0) {
    base = scene.room.wall_colors[hit.surface];
  } else {
    return Eigen::Vector3d::Zero();
  }
  // checker parity just in front of the surface to dodge plane roundoff
  const Eigen::Vector3d p = hit.point - dir * 1e-7;
  const double cs = scene.room.checker_size;
  const long long parity = static_cast<long long>(std::floor(p.x() / cs)) +
                           static_cast<long long>(std::floor(p.y() / cs)) +
                           static_cast<long long>(std::floor(p.z() / cs));
  const double mod = (parity & 1LL) ? 1.0 : 0.8;
  return base * mod;
}

namespace {

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

}  // namespace

RenderResult render_equirect(const SceneSpec& scene, const CameraPose& cam, int width,
                             int height) {
  if (width != 2 * height || height <= 0) {
    throw DataError("equirect render requires W = 2H");
  }
  RenderResult out;
  out.image = make_image(width, height);
  out.depth = make_float_map(width, height);
  const Eigen::Matrix3d rot = cam.orientation.toRotationMatrix();
  std::uint8_t* px = out.image.pixels.data();
  for (int y = 0; y < height; ++y) {
    const double v = (y + 0.5) / height;
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const Eigen::Vector3d dir = rot * equirect_uv_to_dir(u, v);
      const RayHit hit = raycast(scene, cam.position, dir);
      const Eigen::Vector3d c = shade(scene, hit, dir);
      *px++ = to_byte(c.x());
      *px++ = to_byte(c.y());
      *px++ = to_byte(c.z());
      out.depth.at(x, y) = hit.t;
    }
  }
  return out;
}

Eigen::Matrix3d view_rotation(const CameraPose& cam, const ViewAngles& angles) {
  return cam.orientation.toRotationMatrix() * rotation_from_angles(angles) *
         camera_basis();
}

RenderResult render_perspective(const SceneSpec& scene, const CameraPose& cam,
                                const ViewAngles& angles, int height, int width) {
  if (height <= 0 || width <= 0) throw DataError("view dimensions must be positive");
  RenderResult out;
  out.image = make_image(width, height);
  out.depth = make_float_map(width, height);
  const Eigen::Matrix3d rot = view_rotation(cam, angles);
  const double tan_h = std::tan(angles.fov / 2.0);
  const double tan_v = std::tan(vertical_fov(angles.fov, width, height) / 2.0);
  std::uint8_t* px = out.image.pixels.data();
  for (int y = 0; y < height; ++y) {
    const double ny = (2.0 * (y + 0.5) / height - 1.0) * tan_v;
    for (int x = 0; x < width; ++x) {
      const double nx = (2.0 * (x + 0.5) / width - 1.0) * tan_h;
      const Eigen::Vector3d dir = (rot * Eigen::Vector3d(nx, ny, 1.0)).normalized();
      const RayHit hit = raycast(scene, cam.position, dir);
      const Eigen::Vector3d c = shade(scene, hit, dir);
      *px++ = to_byte(c.x());
      *px++ = to_byte(c.y());
      *px++ = to_byte(c.z());
      out.depth.at(x, y) = hit.t;
    }
  }
  return out;
}

TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "line") return TrajectoryKind::line;
  if (s == "loop") return TrajectoryKind::loop;
  throw UsageError("unknown trajectory kind: " + s);
}

std::vector<CameraPose> make_trajectory(const SceneSpec& scene, int n,
                                        TrajectoryKind kind, double speed_mps) {
  if (n <= 0) throw DataError("trajectory needs n >= 1");
  if (!(speed_mps > 0.0)) throw DataError("speed must be positive");
  const Eigen::Vector3d center = (scene.room.min + scene.room.max) / 2.0;
  std::vector<CameraPose> poses;
  poses.reserve(n);
  if (kind == TrajectoryKind::line) {
    const double span = speed_mps * (n - 1);
    const Eigen::Vector3d start = center - Eigen::Vector3d(span / 2.0, 0.0, 0.0);
    for (int k = 0; k < n; ++k) {
      CameraPose p;
      p.position = start + Eigen::Vector3d(speed_mps * k, 0.0, 0.0);
      poses.push_back(p);
    }
  } else {
    if (n < 3) throw DataError("loop trajectory needs n >= 3");
    const double step = 2.0 * kPi / (n - 1);
    const double radius = speed_mps / (2.0 * std::sin(step / 2.0));
    for (int k = 0; k < n; ++k) {
      CameraPose p;
      const double a = step * k;
      p.position = center + Eigen::Vector3d(radius * std::cos(a),
                                            radius * std::sin(a), 0.0);
      poses.push_back(p);
    }
  }
  for (const CameraPose& p : poses) {
    if (!inside_room(scene.room, p.position, 0.2)) {
      throw DataError("trajectory exits the room");
    }
    for (const Primitive& prim : scene.primitives) {
      if (inside_primitive(prim, p.position, 0.1)) {
        throw DataError("trajectory intersects a primitive");
      }
    }
  }
  return poses;
}

RelativePose ground_truth_view_pose(const CameraPose& cam_a, const ViewAngles& angles_a,
                                    const CameraPose& cam_b, const ViewAngles& angles_b) {
  const Eigen::Matrix3d wa = view_rotation(cam_a, angles_a);
  const Eigen::Matrix3d wb = view_rotation(cam_b, angles_b);
  RelativePose pose;
  pose.rotation = canonical_quaternion(Eigen::Quaterniond(wb.transpose() * wa));
  pose.translation = wb.transpose() * (cam_a.position - cam_b.position);
  pose.scale_state = ScaleState::metric;
  return pose;
}

bool point_visible_from(const SceneSpec& scene, const Eigen::Vector3d& point,
                        const CameraPose& cam, const ViewAngles& angles, int width,
                        int height) {
  const Eigen::Matrix3d rot = view_rotation(cam, angles);
  const Eigen::Vector3d local = rot.transpose() * (point - cam.position);
  if (!(local.z() > 1e-9)) return false;
  const double tan_h = std::tan(angles.fov / 2.0);
  const double tan_v = std::tan(vertical_fov(angles.fov, width, height) / 2.0);
  if (std::abs(local.x() / local.z()) > tan_h) return false;
  if (std::abs(local.y() / local.z()) > tan_v) return false;
  const double dist = (point - cam.position).norm();
  if (dist < 1e-9) return true;
  const Eigen::Vector3d dir = (point - cam.position) / dist;
  const RayHit hit = raycast(scene, cam.position, dir);
  return hit.t >= dist * (1.0 - kOcclusionEps) - kOcclusionEps;
}

double covisibility(const SceneSpec& scene, const CameraPose& cam_a,
                    const CameraPose& cam_b, const ViewAngles& angles_a,
                    const ViewAngles& angles_b, int samples) {
  if (samples <= 0) throw DataError("covisibility needs samples >= 1");
  std::uint64_t seed = hash_mix(scene.seed, std::uint64_t{0x636f766973});
  for (int i = 0; i < 3; ++i) {
    seed = hash_mix(seed, cam_a.position[i]);
    seed = hash_mix(seed, cam_b.position[i]);
  }
  seed = hash_mix(seed, angles_a.pitch);
  seed = hash_mix(seed, angles_a.yaw);
  seed = hash_mix(seed, angles_b.pitch);
  seed = hash_mix(seed, angles_b.yaw);
  seed = hash_mix(seed, static_cast<std::uint64_t>(samples));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Eigen::Matrix3d rot_a = view_rotation(cam_a, angles_a);
  const double tan_h = std::tan(angles_a.fov / 2.0);
  int visible = 0;
  for (int s = 0; s < samples; ++s) {
    const double nx = (2.0 * unit(rng) - 1.0) * tan_h;
    const double ny = (2.0 * unit(rng) - 1.0) * tan_h;  // square aspect
    const Eigen::Vector3d dir = (rot_a * Eigen::Vector3d(nx, ny, 1.0)).normalized();
    const RayHit hit = raycast(scene, cam_a.position, dir);
    if (point_visible_from(scene, hit.point, cam_b, angles_b, 1, 1)) ++visible;
  }
  return static_cast<double>(visible) / static_cast<double>(samples);
}

}  // namespace panoforge
