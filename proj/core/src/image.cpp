#include "panoforge/image.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <limits>
#include <memory>

#include "panoforge/errors.hpp"

namespace panoforge {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  (void)msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

Image make_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

FloatMap make_float_map(int width, int height, double fill) {
  if (width <= 0 || height <= 0) throw DataError("map dimensions must be positive");
  FloatMap m;
  m.width = width;
  m.height = height;
  m.values.assign(static_cast<std::size_t>(width) * height, fill);
  return m;
}

Image load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DataError("cannot open PNG: " + path.string());

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError("not a PNG file: " + path.string());
  }

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
  if (!png) throw DataError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng init failed");
  }

  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w == 0 || h == 0 || png_get_channels(png, info) != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported PNG layout: " + path.string());
  }

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  if (image.empty() || image.pixels.size() !=
                           static_cast<std::size_t>(image.width) * image.height * 3) {
    throw DataError("cannot save empty or inconsistent image");
  }
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DataError("cannot write PNG: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
  if (!png) throw DataError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng init failed");
  }

  std::vector<png_const_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3;
  }
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

void vector_write_fn(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

void vector_flush_fn(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty() || image.pixels.size() !=
                           static_cast<std::size_t>(image.width) * image.height * 3) {
    throw DataError("cannot encode empty or inconsistent image");
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
  if (!png) throw DataError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng init failed");
  }

  std::vector<std::uint8_t> bytes;
  std::vector<png_const_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encode failed");
  }

  png_set_write_fn(png, &bytes, vector_write_fn, vector_flush_fn);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3;
  }
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void sample_equirect_bilinear(const Image& pano, double u, double v, double rgb_out[3]) {
  const int w = pano.width;
  const int h = pano.height;
  double x = u * w - 0.5;
  double y = v * h - 0.5;

  double x0f = std::floor(x);
  const double fx = x - x0f;
  int x0 = static_cast<int>(x0f) % w;
  if (x0 < 0) x0 += w;
  const int x1 = (x0 + 1) % w;  // horizontal wrap

  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int y0 = static_cast<int>(std::floor(y));
  const int y1 = std::min(y0 + 1, h - 1);  // vertical clamp
  const double fy = y - y0;

  const std::uint8_t* p00 = pano.at(x0, y0);
  const std::uint8_t* p10 = pano.at(x1, y0);
  const std::uint8_t* p01 = pano.at(x0, y1);
  const std::uint8_t* p11 = pano.at(x1, y1);
  for (int c = 0; c < 3; ++c) {
    const double top = p00[c] * (1.0 - fx) + p10[c] * fx;
    const double bot = p01[c] * (1.0 - fx) + p11[c] * fx;
    rgb_out[c] = top * (1.0 - fy) + bot * fy;
  }
}

double mse_rgb(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DataError("image dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

double psnr_rgb(const Image& a, const Image& b) {
  const double mse = mse_rgb(a, b);
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace panoforge
