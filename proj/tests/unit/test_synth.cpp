#include <doctest.h>

#include <random>

#include "panoforge/errors.hpp"
#include "panoforge/synth.hpp"

using namespace panoforge;

namespace {

// A room whose walls sit far away plus one sphere centered on the camera
// makes every ray hit the sphere interior at the same distance.
SceneSpec spherical_shell_scene(double radius, const Eigen::Vector3d& center) {
  SceneSpec scene;
  scene.room.min = center - Eigen::Vector3d(50, 50, 50);
  scene.room.max = center + Eigen::Vector3d(50, 50, 50);
  SpherePrim shell;
  shell.center = center;
  shell.radius = radius;
  scene.primitives = {shell};
  return scene;
}

}  // namespace

TEST_CASE("camera at the center of a spherical shell sees uniform depth") {
  const Eigen::Vector3d c(0, 0, 0);
  const SceneSpec scene = spherical_shell_scene(3.0, c);
  CameraPose cam;
  cam.position = c;
  const RenderResult r = render_equirect(scene, cam, 64, 32);
  for (double d : r.depth.values) CHECK(d == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("offset camera sees min and max depth fore and aft") {
  const Eigen::Vector3d c(0, 0, 0);
  const SceneSpec scene = spherical_shell_scene(3.0, c);
  CameraPose cam;
  cam.position = {1.0, 0.0, 0.0};
  const RenderResult r = render_equirect(scene, cam, 128, 64);
  // forward pixel (u=0.5, v=0.5)
  const double fwd = r.depth.at(64, 32);
  CHECK(fwd == doctest::Approx(2.0).epsilon(1e-3));
  double max_d = 0.0, min_d = 1e9;
  for (double d : r.depth.values) {
    max_d = std::max(max_d, d);
    min_d = std::min(min_d, d);
  }
  CHECK(min_d == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(max_d == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("equirect renders are bit identical across runs") {
  const SceneSpec scene = make_default_scene();
  CameraPose cam;
  cam.position = {0.4, -1.0, 1.2};
  const RenderResult a = render_equirect(scene, cam, 128, 64);
  const RenderResult b = render_equirect(scene, cam, 128, 64);
  CHECK(a.image.pixels == b.image.pixels);
  CHECK(a.depth.values == b.depth.values);
  CHECK_THROWS_AS(render_equirect(scene, cam, 100, 60), DataError);
}

TEST_CASE("rendered wall depth matches the analytic plane distance") {
  SceneSpec scene;
  scene.room.min = {-2, -3, -1};
  scene.room.max = {5, 3, 4};
  CameraPose cam;
  cam.position = {0, 0, 1};
  const RenderResult r = render_equirect(scene, cam, 256, 128);
  // the pixel nearest the forward direction looks along +x at the wall x = 5;
  // its ray is half a pixel off axis
  const Eigen::Vector3d fwd_dir = equirect_uv_to_dir(128.5 / 256.0, 64.5 / 128.0);
  CHECK(r.depth.at(128, 64) == doctest::Approx(5.0 / fwd_dir.x()).epsilon(1e-9));
  // top row looks at the ceiling z = 4, three meters up
  const Eigen::Vector3d top_dir = equirect_uv_to_dir(0.5 / 256.0, 0.5 / 128.0);
  CHECK(r.depth.at(0, 0) == doctest::Approx(3.0 / top_dir.z()).epsilon(1e-9));
}

TEST_CASE("line trajectory spaces positions by the speed") {
  SceneSpec scene;
  scene.room.min = {-40, -5, 0};
  scene.room.max = {40, 5, 4};
  const auto poses = make_trajectory(scene, 60, TrajectoryKind::line, 1.0);
  REQUIRE(poses.size() == 60);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    CHECK((poses[i].position - poses[i - 1].position).norm() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  // identity heading throughout
  for (const auto& p : poses) {
    CHECK(p.orientation.angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);
  }
}

TEST_CASE("loop trajectory closes onto its start") {
  SceneSpec scene;
  scene.room.min = {-15, -15, 0};
  scene.room.max = {15, 15, 4};
  const auto poses = make_trajectory(scene, 60, TrajectoryKind::loop, 1.0);
  REQUIRE(poses.size() == 60);
  CHECK((poses.front().position - poses.back().position).norm() < 0.5);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    CHECK((poses[i].position - poses[i - 1].position).norm() ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("trajectories that exit the room are rejected") {
  SceneSpec scene;  // default room is 10x10
  CHECK_THROWS_AS(make_trajectory(scene, 60, TrajectoryKind::line, 1.0), DataError);
}

TEST_CASE("ground-truth relative poses compose") {
  SceneSpec scene;
  scene.room.min = {-40, -5, 0};
  scene.room.max = {40, 5, 4};
  const auto poses = make_trajectory(scene, 10, TrajectoryKind::line, 1.0);
  const ViewAngles a0{0.0, 0.0, kPi / 2};
  const ViewAngles a1{0.1, 1.0, kPi / 2};
  const ViewAngles a2{-0.2, 3.0, kPi / 2};
  const RelativePose p01 = ground_truth_view_pose(poses[0], a0, poses[1], a1);
  const RelativePose p12 = ground_truth_view_pose(poses[1], a1, poses[2], a2);
  const RelativePose p02 = ground_truth_view_pose(poses[0], a0, poses[2], a2);
  const Eigen::Matrix3d composed =
      p12.rotation.toRotationMatrix() * p01.rotation.toRotationMatrix();
  CHECK((composed - p02.rotation.toRotationMatrix()).norm() < 1e-9);
  const Eigen::Vector3d t_composed =
      p12.rotation.toRotationMatrix() * p01.translation + p12.translation;
  CHECK((t_composed - p02.translation).norm() < 1e-9);
}

TEST_CASE("covisibility of identical views is one, opposite views near zero") {
  const SceneSpec scene = make_default_scene();
  CameraPose cam;
  cam.position = {0.0, 0.0, 1.5};
  const ViewAngles fwd{0.0, 0.0, kPi / 2};
  const ViewAngles back{0.0, kPi, kPi / 2};
  CHECK(covisibility(scene, cam, cam, fwd, fwd, 512) == doctest::Approx(1.0));
  CHECK(covisibility(scene, cam, cam, fwd, back, 1024) < 0.05);
}

TEST_CASE("covisibility is roughly symmetric for overlapping pairs") {
  const SceneSpec scene = make_default_scene();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    CameraPose a, b;
    a.position = {un(rng), un(rng), 1.5};
    b.position = a.position + Eigen::Vector3d(0.4 * un(rng), 0.4 * un(rng), 0.0);
    const ViewAngles va{0.0, 0.3 * un(rng), kPi / 2};
    const ViewAngles vb{0.0, 0.3 * un(rng), kPi / 2};
    const double cab = covisibility(scene, a, b, va, vb, 4096);
    const double cba = covisibility(scene, b, a, vb, va, 4096);
    CHECK(std::abs(cab - cba) < 0.1);
  }
}

TEST_CASE("covisibility is deterministic given the scene seed") {
  const SceneSpec scene = make_default_scene();
  CameraPose a, b;
  a.position = {0.0, 0.0, 1.5};
  b.position = {0.5, 0.2, 1.5};
  const ViewAngles v{0.0, 0.4, kPi / 2};
  CHECK(covisibility(scene, a, b, v, v, 1024) == covisibility(scene, a, b, v, v, 1024));
}

TEST_CASE("scene json round trips") {
  const SceneSpec scene = make_default_scene();
  const SceneSpec back = scene_from_json_text(scene_to_json_text(scene));
  CHECK(back.room.min == scene.room.min);
  CHECK(back.room.max == scene.room.max);
  CHECK(back.room.checker_size == scene.room.checker_size);
  CHECK(back.primitives.size() == scene.primitives.size());
  CHECK(back.seed == scene.seed);
  CHECK_THROWS_AS(scene_from_json_text("{not json"), DataError);
  CHECK_THROWS_AS(scene_from_json_text("{\"room\":{\"min\":[0,0,0],\"max\":[1,1,1],"
                                       "\"checker_size\":-1}}"),
                  DataError);
}
