#include "esakit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "esakit/errors.hpp"

namespace esakit {

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw ShapeError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  pixels_.assign(n, fill);
  mask_.assign(n, 0);
}

void Raster::clear_mask() { std::fill(mask_.begin(), mask_.end(), 0); }

std::size_t Raster::mask_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::optional<BBox> mask_bbox(const Raster& raster) {
  BBox b{raster.width(), raster.height(), 0, 0};
  bool any = false;
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      if (!raster.mask(x, y)) continue;
      any = true;
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x + 1);
      b.y1 = std::max(b.y1, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return b;
}

Raster crop(const Raster& raster, const BBox& box) {
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > raster.width() || box.y1 > raster.height()) {
    throw ShapeError("crop rectangle exceeds the raster");
  }
  Raster out(box.width(), box.height());
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) {
      out.set_pixel(x, y, raster.pixel(box.x0 + x, box.y0 + y));
      out.set_mask(x, y, raster.mask(box.x0 + x, box.y0 + y));
    }
  }
  return out;
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Source index range [lo, hi) feeding output index `o` along one axis.
std::pair<int, int> mask_source_range(int o, int src_len, int dst_len) {
  const double ratio = static_cast<double>(src_len) / dst_len;
  if (dst_len >= src_len) {
    const int s = std::min(src_len - 1, static_cast<int>(std::floor((o + 0.5) * ratio)));
    return {s, s + 1};
  }
  const int lo = static_cast<int>(std::floor(o * ratio));
  const int hi = std::min(src_len, static_cast<int>(std::ceil((o + 1) * ratio)));
  return {lo, std::max(hi, lo + 1)};
}

}  // namespace

Raster resize(const Raster& raster, int width, int height) {
  Raster out(width, height);
  const double rx = static_cast<double>(raster.width()) / width;
  const double ry = static_cast<double>(raster.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5) * ry - 0.5, 0.0, raster.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, raster.height() - 1);
    const double fy = sy - y0;
    const auto [my0, my1] = mask_source_range(y, raster.height(), height);
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5) * rx - 0.5, 0.0, raster.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, raster.width() - 1);
      const double fx = sx - x0;
      const Rgb a = raster.pixel(x0, y0), b = raster.pixel(x1, y0);
      const Rgb c = raster.pixel(x0, y1), d = raster.pixel(x1, y1);
      auto lerp = [&](std::uint8_t Rgb::*ch) {
        const double top = (1 - fx) * (a.*ch) + fx * (b.*ch);
        const double bottom = (1 - fx) * (c.*ch) + fx * (d.*ch);
        return to_byte((1 - fy) * top + fy * bottom);
      };
      out.set_pixel(x, y, Rgb{lerp(&Rgb::r), lerp(&Rgb::g), lerp(&Rgb::b)});

      const auto [mx0, mx1] = mask_source_range(x, raster.width(), width);
      bool on = false;
      for (int v = my0; v < my1 && !on; ++v) {
        for (int u = mx0; u < mx1 && !on; ++u) on = raster.mask(u, v);
      }
      out.set_mask(x, y, on);
    }
  }
  return out;
}

void blit(const Raster& src, Raster& dst, int x, int y) {
  for (int v = 0; v < src.height(); ++v) {
    for (int u = 0; u < src.width(); ++u) {
      if (!dst.contains(x + u, y + v)) continue;
      dst.set_pixel(x + u, y + v, src.pixel(u, v));
      dst.set_mask(x + u, y + v, src.mask(u, v));
    }
  }
}

double mask_iou(const Raster& a, const Raster& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError("IoU of differently sized masks");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto ma = a.mask_bits();
  const auto mb = b.mask_bits();
  for (std::size_t i = 0; i < ma.size(); ++i) {
    inter += (ma[i] && mb[i]) ? 1 : 0;
    uni += (ma[i] || mb[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace esakit
