#include "esakit/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "esakit/errors.hpp"

namespace esakit {
namespace {

void require_same_size(const Raster& a, const Raster& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()));
  }
}

constexpr std::uint8_t ramp_channel(int i, int band) {
  const int v = 3 * i - 255 * band;
  return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

constexpr std::array<Rgb, 256> make_ramp() {
  std::array<Rgb, 256> ramp{};
  for (int i = 0; i < 256; ++i) {
    ramp[i] = Rgb{ramp_channel(i, 0), ramp_channel(i, 1), ramp_channel(i, 2)};
  }
  return ramp;
}

constexpr std::array<Rgb, 256> kHeatRamp = make_ramp();

}  // namespace

Raster prepare_masked_scene(const Raster& scene, const Raster& source_mask,
                            const Raster& target_mask) {
  require_same_size(scene, source_mask, "source mask");
  require_same_size(scene, target_mask, "target mask");
  Raster out = scene;
  out.clear_mask();
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      if (source_mask.mask(x, y) || target_mask.mask(x, y)) {
        out.set_pixel(x, y, kNeutralGray);
        out.set_mask(x, y, true);
      }
    }
  }
  return out;
}

InContextPair compose_incontext(const Raster& reference, const Raster& masked_scene,
                                const Raster& target_mask) {
  require_same_size(reference, masked_scene, "reference vs scene");
  require_same_size(masked_scene, target_mask, "scene vs target mask");
  const int w = reference.width();
  const int h = reference.height();

  Raster composite(2 * w, h);
  Raster pair_mask(2 * w, h, kBlack);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      composite.set_pixel(x, y, reference.pixel(x, y));
      composite.set_pixel(w + x, y, masked_scene.pixel(x, y));
      if (target_mask.mask(x, y)) {
        pair_mask.set_mask(w + x, y, true);
        pair_mask.set_pixel(w + x, y, kWhite);
      }
    }
  }
  return {reference, masked_scene, std::move(composite), std::move(pair_mask)};
}

std::pair<Raster, Raster> split_incontext(const Raster& composite) {
  if (composite.width() % 2 != 0) throw ShapeError("composite width must be even");
  const int w = composite.width() / 2;
  return {crop(composite, {0, 0, w, composite.height()}),
          crop(composite, {w, 0, 2 * w, composite.height()})};
}

const std::array<Rgb, 256>& heat_ramp() { return kHeatRamp; }

Heatmap attention_heatmap(const AttentionMap& map, std::size_t key, int height, int width) {
  if (height < 1 || width < 1 ||
      static_cast<std::size_t>(height) * static_cast<std::size_t>(width) != map.n_queries()) {
    throw ShapeError("layout " + std::to_string(height) + "x" + std::to_string(width) +
                     " does not match " + std::to_string(map.n_queries()) + " queries");
  }
  const auto& column = map.column(key);
  Heatmap hm;
  hm.width = width;
  hm.height = height;
  hm.values.assign(column.begin(), column.end());
  const double peak = *std::max_element(hm.values.begin(), hm.values.end());
  if (peak > 0.0) {
    for (auto& v : hm.values) v /= peak;
  }
  hm.rendered = Raster(width, height, kBlack);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto idx = static_cast<std::size_t>(std::lround(hm.value(x, y) * 255.0));
      hm.rendered.set_pixel(x, y, kHeatRamp[std::min<std::size_t>(idx, 255)]);
    }
  }
  return hm;
}

std::string heatmap_filename(const std::string& stem, const std::string& strategy,
                             std::size_t key) {
  return stem + "__" + strategy + "__k" + std::to_string(key) + ".png";
}

}  // namespace esakit
