#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "esakit/geometry.hpp"
#include "esakit/raster.hpp"

namespace esakit {

/// Wavefront subset: `v x y z [r g b]` and `f i j k` (1-based). Blank lines
/// and `#` comments are skipped; any other line is a ParseError naming it.
Mesh parse_mesh(std::istream& in, const std::string& source_name = "<mesh>");
Mesh load_mesh(const std::filesystem::path& path);

/// 8-bit RGB PNG of the raster's image.
void write_png_rgb(const std::filesystem::path& path, const Raster& raster);
/// 8-bit grayscale PNG of the raster's mask (255 set, 0 clear).
void write_png_mask(const std::filesystem::path& path, const Raster& raster);

/// Reads any PNG as RGB; the mask is left clear.
Raster read_png_rgb(const std::filesystem::path& path);
/// Reads any PNG as grayscale; mask set where value >= 128. Image is black
/// with white under the mask.
Raster read_png_mask(const std::filesystem::path& path);

}  // namespace esakit
