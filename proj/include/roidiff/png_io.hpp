#ifndef ROIDIFF_PNG_IO_HPP
#define ROIDIFF_PNG_IO_HPP

#include <string>

#include "roidiff/raster.hpp"

namespace roidiff {

/// Decode an 8-bit PNG as gray (1), RGB (3) or RGBA (4). Palette and
/// 16-bit images are expanded/stripped to 8-bit channels.
Raster read_png(const std::string& path);

/// Encode a raster as PNG. Writes to a temporary file in the same
/// directory and renames it into place so readers never see partial data.
void write_png(const std::string& path, const Raster& image);

} // namespace roidiff

#endif
