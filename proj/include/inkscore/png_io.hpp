#pragma once

#include <string>
#include <vector>

#include "inkscore/raster.hpp"

namespace inkscore {

/// Reads a PNG as luminance. Color inputs are converted with
/// 0.299 R + 0.587 G + 0.114 B; grayscale inputs pass through exactly.
GrayRaster load_gray_png(const std::string& path);
GrayRaster decode_gray_png(const std::vector<unsigned char>& bytes);

/// Writes an 8-bit grayscale PNG with pixel values 0 (ink) or 255.
void write_binary_png(const BinaryRaster& img, const std::string& path);
std::vector<unsigned char> encode_binary_png(const BinaryRaster& img);

} // namespace inkscore
