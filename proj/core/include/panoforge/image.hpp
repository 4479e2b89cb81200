#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace panoforge {

/// 8-bit RGB raster, interleaved, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  bool empty() const { return width == 0 || height == 0; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

Image make_image(int width, int height, std::uint8_t r = 0, std::uint8_t g = 0,
                 std::uint8_t b = 0);

/// Single-channel double plane (depth, confidence, masks).
struct FloatMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

FloatMap make_float_map(int width, int height, double fill = 0.0);

/// Loads an 8-bit RGB PNG (gray/palette/alpha inputs are converted).
/// Throws DataError on missing or malformed files.
Image load_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG with fixed settings; output bytes are
/// deterministic for equal pixel data.
void save_png(const Image& image, const std::filesystem::path& path);

/// PNG encoding into memory (same settings as save_png).
std::vector<std::uint8_t> encode_png(const Image& image);

/// Bilinear sample of an RGB image in equirect addressing: u wraps
/// horizontally, v clamps vertically. Returns channels in [0,255].
void sample_equirect_bilinear(const Image& pano, double u, double v, double rgb_out[3]);

/// Mean squared error over all channels (0..255 scale) and the PSNR in dB.
double mse_rgb(const Image& a, const Image& b);
double psnr_rgb(const Image& a, const Image& b);

}  // namespace panoforge
