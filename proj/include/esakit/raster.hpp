#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace esakit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kNeutralGray{128, 128, 128};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  double center_x() const noexcept { return 0.5 * (x0 + x1); }
  double center_y() const noexcept { return 0.5 * (y0 + y1); }
  bool operator==(const BBox&) const = default;
};

/// 8-bit RGB image with a binary object mask of the same size.
class Raster {
 public:
  Raster(int width, int height, Rgb fill = kWhite);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Rgb pixel(int x, int y) const { return pixels_[index(x, y)]; }
  void set_pixel(int x, int y, Rgb c) { pixels_[index(x, y)] = c; }
  bool mask(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set_mask(int x, int y, bool on) { mask_[index(x, y)] = on ? 1 : 0; }

  void clear_mask();
  std::size_t mask_count() const;
  std::span<const Rgb> pixels() const noexcept { return pixels_; }
  std::span<const std::uint8_t> mask_bits() const noexcept { return mask_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
  std::vector<std::uint8_t> mask_;
};

std::optional<BBox> mask_bbox(const Raster& raster);

/// Copies the rectangle (image and mask).
Raster crop(const Raster& raster, const BBox& box);

/// Image: bilinear with pixel-center alignment. Mask: nearest along an axis
/// that is magnified; along a minified axis an output pixel is set iff any
/// source pixel inside its footprint is set, so thin features survive.
Raster resize(const Raster& raster, int width, int height);

/// Copies `src` (image and mask) into `dst` with its top-left corner at (x, y),
/// clipping silently.
void blit(const Raster& src, Raster& dst, int x, int y);

/// Intersection over union of the two masks; 1 when both are empty.
double mask_iou(const Raster& a, const Raster& b);

}  // namespace esakit
