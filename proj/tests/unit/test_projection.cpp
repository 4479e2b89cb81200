#include <doctest.h>

#include <random>

#include "panoforge/errors.hpp"
#include "panoforge/projection.hpp"
#include "panoforge/synth.hpp"

using namespace panoforge;

namespace {

Image shifted_columns(const Image& img, int shift) {
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int src = (x + shift) % img.width;
      const std::uint8_t* s = img.at(src, y);
      std::uint8_t* d = out.at(x, y);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("pano frames enforce W = 2H") {
  CHECK_THROWS_AS(make_pano_frame("v", 0, make_image(100, 60)), DataError);
  CHECK_THROWS_AS(make_pano_frame("v", -5, make_image(128, 64)), DataError);
  CHECK_NOTHROW(make_pano_frame("v", 0, make_image(128, 64)));
}

TEST_CASE("constant pano projects to a constant view at any angles") {
  const PanoFrame pano = make_pano_frame("v", 0, make_image(128, 64, 10, 200, 60));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const ViewAngles a{(un(rng) - 0.5) * 1.2, un(rng) * 6.28, kPi / 2};
    const PerspectiveView view = project(pano, a, 32, 32);
    for (std::size_t p = 0; p < view.image.pixels.size(); p += 3) {
      CHECK(view.image.pixels[p] == 10);
      CHECK(view.image.pixels[p + 1] == 200);
      CHECK(view.image.pixels[p + 2] == 60);
    }
  }
}

TEST_CASE("projection is deterministic") {
  SceneSpec scene = make_default_scene();
  CameraPose cam;
  cam.position = {0.5, -0.5, 1.4};
  const RenderResult r = render_equirect(scene, cam, 256, 128);
  const PanoFrame pano = make_pano_frame("v", 0, r.image);
  const ViewAngles a{0.2, 1.1, kPi / 2};
  const PerspectiveView v1 = project(pano, a, 64, 64);
  const PerspectiveView v2 = project(pano, a, 64, 64);
  CHECK(v1.image.pixels == v2.image.pixels);
}

TEST_CASE("degenerate output dims are rejected") {
  const PanoFrame pano = make_pano_frame("v", 0, make_image(64, 32));
  CHECK_THROWS_AS(project(pano, ViewAngles{}, 0, 32), DataError);
  CHECK_THROWS_AS(project(pano, ViewAngles{}, 32, -1), DataError);
}

TEST_CASE("cardinal views sit at the four yaws, pitch zero, in order") {
  const PanoFrame pano = make_pano_frame("v", 0, make_image(128, 64, 9, 9, 9));
  const auto views = cardinal_views(pano, kPi / 2, 16, 16);
  REQUIRE(views.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(views[i].angles.yaw == doctest::Approx(kCardinalYaws[i]));
    CHECK(views[i].angles.pitch == 0.0);
  }
  // constant pano: all four views identical
  for (int i = 1; i < 4; ++i) CHECK(views[i].image.pixels == views[0].image.pixels);
}

TEST_CASE("yaw-rotated pano gives cyclically shifted cardinal views") {
  SceneSpec scene = make_default_scene();
  CameraPose cam;
  cam.position = {0.3, 0.2, 1.5};
  const RenderResult r = render_equirect(scene, cam, 256, 128);  // width % 4 == 0
  const PanoFrame pano = make_pano_frame("v", 0, r.image);
  // shifting by W/4 columns rotates the pano by pi/2 in yaw
  const PanoFrame rotated =
      make_pano_frame("v", 0, shifted_columns(r.image, r.image.width / 4));

  const auto base = cardinal_views(pano, kPi / 2, 64, 64);
  const auto shifted = cardinal_views(rotated, kPi / 2, 64, 64);
  for (int i = 0; i < 4; ++i) {
    const Image& a = shifted[i].image;
    const Image& b = base[(i + 1) % 4].image;
    int max_diff = 0;
    for (std::size_t p = 0; p < a.pixels.size(); ++p) {
      max_diff = std::max(max_diff, std::abs(int(a.pixels[p]) - int(b.pixels[p])));
    }
    CHECK(max_diff <= 2);
  }
}

TEST_CASE("projection matches a direct perspective raycast above 30 dB") {
  SceneSpec scene = make_default_scene();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    CameraPose cam;
    cam.position = {(un(rng) - 0.5) * 4.0, (un(rng) - 0.5) * 4.0,
                    1.0 + un(rng) * 2.0};
    const RenderResult pano_r = render_equirect(scene, cam, 2048, 1024);
    const PanoFrame pano = make_pano_frame("v", 0, pano_r.image);
    const ViewAngles a{(un(rng) - 0.5) * kPi / 2, un(rng) * 2.0 * kPi, kPi / 2};
    const PerspectiveView projected = project(pano, a, 256, 256);
    const RenderResult direct = render_perspective(scene, cam, a, 256, 256);
    CHECK(psnr_rgb(projected.image, direct.image) > 30.0);
  }
}
