#include <png.h>

#include <cstring>
#include <vector>

#include "esakit/errors.hpp"
#include "esakit/io.hpp"

namespace esakit {
namespace {

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw IoError("cannot write '" + path.string() + "': " + why);
  }
}

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, png_uint_32 format,
                                   int& width, int& height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read '" + path.string() + "': " + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw IoError("cannot decode '" + path.string() + "': " + why);
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  return bytes;
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const Raster& raster) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(raster.pixels().size() * 3);
  for (const Rgb& p : raster.pixels()) {
    bytes.push_back(p.r);
    bytes.push_back(p.g);
    bytes.push_back(p.b);
  }
  write_png(path, raster.width(), raster.height(), PNG_FORMAT_RGB, bytes);
}

void write_png_mask(const std::filesystem::path& path, const Raster& raster) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(raster.mask_bits().size());
  for (auto m : raster.mask_bits()) bytes.push_back(m ? 255 : 0);
  write_png(path, raster.width(), raster.height(), PNG_FORMAT_GRAY, bytes);
}

Raster read_png_rgb(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_RGB, w, h);
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = 3 * (static_cast<std::size_t>(y) * w + x);
      out.set_pixel(x, y, Rgb{bytes[i], bytes[i + 1], bytes[i + 2]});
    }
  }
  return out;
}

Raster read_png_mask(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, w, h);
  Raster out(w, h, kBlack);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool on = bytes[static_cast<std::size_t>(y) * w + x] >= 128;
      out.set_mask(x, y, on);
      if (on) out.set_pixel(x, y, kWhite);
    }
  }
  return out;
}

}  // namespace esakit
