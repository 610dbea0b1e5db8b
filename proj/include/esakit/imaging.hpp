#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "esakit/attention.hpp"
#include "esakit/raster.hpp"

namespace esakit {

/// Side-by-side model input: [reference | masked scene] with the paired mask
/// [zeros | target mask].
struct InContextPair {
  Raster reference_panel;
  Raster scene_panel;
  Raster composite;  // 2T x T image
  Raster pair_mask;  // 2T x T, mask only
};

/// Grays out (128, 128, 128) every pixel under source ∪ target. The result's
/// mask is that union.
Raster prepare_masked_scene(const Raster& scene, const Raster& source_mask,
                            const Raster& target_mask);

InContextPair compose_incontext(const Raster& reference, const Raster& masked_scene,
                                const Raster& target_mask);

/// Inverse of the horizontal concatenation: left and right panels.
std::pair<Raster, Raster> split_incontext(const Raster& composite);

/// Black -> red -> yellow -> white. Entry i has r + g + b == 3 i.
const std::array<Rgb, 256>& heat_ramp();

struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, max-normalized into [0, 1]
  Raster rendered{1, 1};

  double value(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Reshapes key column `key` row-major to height x width (which must equal
/// the query count), normalizes by its max and color-ramps it.
Heatmap attention_heatmap(const AttentionMap& map, std::size_t key, int height, int width);

/// `<stem>__<strategy>__k<key>.png`
std::string heatmap_filename(const std::string& stem, const std::string& strategy,
                             std::size_t key);

}  // namespace esakit
