#include "bodyfit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

namespace bodyfit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return f;
}

// Decodes any PNG into 8-bit gray (+alpha stripped).
Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::Parse, path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  std::vector<png_bytep> rows;
  Image<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, path.string() + ": corrupt PNG");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    // Rec. 601 luma weights, in 1/100000 units as libpng expects.
    png_set_rgb_to_gray_fixed(png, 1, 29900, 58700);
  }
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  out = Image<std::uint8_t>(w, h);
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, path.string() + ": unexpected PNG channel layout");
  }
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = out.data().data() + out.index(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_gray8(const Image<std::uint8_t>& img, const std::filesystem::path& path) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  std::vector<png_bytep> rows(img.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = const_cast<png_bytep>(img.data().data() + img.index(0, y));
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image<double> load_png_gray(const std::filesystem::path& path) {
  const auto raw = read_png_gray8(path);
  Image<double> out(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i) out.data()[i] = raw.data()[i] / 255.0;
  return out;
}

void save_png_gray(const Image<double>& image, const std::filesystem::path& path) {
  Image<std::uint8_t> raw(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.data()[i], 0.0, 1.0);
    raw.data()[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_png_gray8(raw, path);
}

Mask load_png_mask(const std::filesystem::path& path) {
  auto raw = read_png_gray8(path);
  for (auto& v : raw.data()) v = v >= 128 ? 1 : 0;
  return raw;
}

void save_png_mask(const Mask& mask, const std::filesystem::path& path) {
  Image<std::uint8_t> raw(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) raw.data()[i] = mask.data()[i] ? 255 : 0;
  write_png_gray8(raw, path);
}

DepthMap load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string magic;
  int w = 0;
  int h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();  // single whitespace byte before the raster
  if (magic != "Pf" || w <= 0 || h <= 0 || scale == 0.0) {
    throw Error(ErrorKind::Parse, path.string() + ": not a single-channel PFM");
  }
  if (scale > 0.0) throw Error(ErrorKind::Parse, path.string() + ": big-endian PFM is not supported");
  DepthMap out{Image<double>(w, h), Mask(w, h, 0)};
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(w * sizeof(float)))) {
      throw Error(ErrorKind::Parse, path.string() + ": truncated PFM raster");
    }
    for (int x = 0; x < w; ++x) {
      const float v = row[x];
      const bool valid = std::isfinite(v);
      out.depth(x, y) = valid ? static_cast<double>(v) : -std::numeric_limits<double>::infinity();
      out.valid(x, y) = valid;
    }
  }
  return out;
}

void save_pfm(const DepthMap& depth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  const int w = depth.width();
  const int h = depth.height();
  out << "Pf\n" << w << ' ' << h << "\n-1.0\n";
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      row[x] = depth.valid(x, y) ? static_cast<float>(depth.depth(x, y)) : -std::numeric_limits<float>::infinity();
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(w * sizeof(float)));
  }
}

}  // namespace bodyfit
