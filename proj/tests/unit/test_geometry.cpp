#include <doctest.h>

#include <random>

#include "panoforge/errors.hpp"
#include "panoforge/geometry.hpp"

using namespace panoforge;

TEST_CASE("equirect uv to direction hits the fixed anchors") {
  CHECK((equirect_uv_to_dir(0.5, 0.5) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK((equirect_uv_to_dir(0.5, 0.0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(equirect_uv_to_dir(1.0, 0.5), DataError);
  CHECK_THROWS_AS(equirect_uv_to_dir(0.5, 1.5), DataError);
}

TEST_CASE("direction to uv inverts the anchors") {
  const Eigen::Vector2d fwd = dir_to_equirect_uv({1, 0, 0});
  CHECK(fwd.x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fwd.y() == doctest::Approx(0.5).epsilon(1e-12));

  const Eigen::Vector2d nadir = dir_to_equirect_uv({0, 0, -1});
  CHECK(nadir.x() == doctest::Approx(0.5));  // pole convention
  CHECK(nadir.y() == doctest::Approx(1.0));

  const Eigen::Vector2d back = dir_to_equirect_uv({-1, 0, 0});
  CHECK(back.x() == doctest::Approx(0.0));
  CHECK(back.y() == doctest::Approx(0.5));

  CHECK_THROWS_AS(dir_to_equirect_uv(Eigen::Vector3d::Zero()), DataError);
}

TEST_CASE("uv round trip is identity to 1e-12 on interior points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double u = un(rng) * 0.999 + 0.0005;
    const double v = un(rng) * 0.998 + 0.001;
    const Eigen::Vector2d uv = dir_to_equirect_uv(equirect_uv_to_dir(u, v));
    CHECK(std::abs(uv.x() - u) < 1e-12);
    CHECK(std::abs(uv.y() - v) < 1e-12);
  }
}

TEST_CASE("rotation_from_angles basics") {
  const Eigen::Matrix3d id = rotation_from_angles({0.0, 0.0, kPi / 2});
  CHECK((id - Eigen::Matrix3d::Identity()).norm() < 1e-15);

  const Eigen::Matrix3d flip = rotation_from_angles({0.0, kPi, kPi / 2});
  CHECK((flip * Eigen::Vector3d(1, 0, 0) - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("rotations are orthonormal with unit determinant") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ViewAngles a =
        make_view_angles(un(rng) * kPi / 2, un(rng) * 4.0, 0.3 + std::abs(un(rng)));
    const Eigen::Matrix3d r = rotation_from_angles(a);
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("view center lands at (yaw, pitch) on the sphere") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double pitch = (un(rng) - 0.5) * kPi * 0.9;
    const double yaw = un(rng) * 2.0 * kPi;
    const ViewAngles a = make_view_angles(pitch, yaw, kPi / 2);
    const Eigen::Vector3d fwd =
        rotation_from_angles(a) * Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector2d uv = dir_to_equirect_uv(fwd);
    const double lon = (uv.x() - 0.5) * 2.0 * kPi;
    const double lat = (0.5 - uv.y()) * kPi;
    CHECK(std::abs(wrap_yaw(lon) - wrap_yaw(yaw)) < 1e-9);
    CHECK(lat == doctest::Approx(pitch).epsilon(1e-9));
  }
}

TEST_CASE("camera basis is a proper rotation") {
  const Eigen::Matrix3d b = camera_basis();
  CHECK((b.transpose() * b - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  CHECK(b.determinant() == doctest::Approx(1.0));
  // forward axis of the camera maps to +x
  CHECK((b * Eigen::Vector3d(0, 0, 1) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("view angle validation") {
  CHECK_THROWS_AS(make_view_angles(2.0, 0.0, 1.0), DataError);
  CHECK_THROWS_AS(make_view_angles(0.0, 0.0, 0.0), DataError);
  CHECK_THROWS_AS(make_view_angles(0.0, 0.0, kPi), DataError);
  const ViewAngles a = make_view_angles(0.1, -0.5, 1.0);
  CHECK(a.yaw >= 0.0);
  CHECK(a.yaw < 2.0 * kPi);
  CHECK(a.yaw == doctest::Approx(2.0 * kPi - 0.5));
}
