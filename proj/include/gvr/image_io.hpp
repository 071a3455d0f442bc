#pragma once

#include "gvr/types.hpp"

#include <filesystem>

namespace gvr {

// 8-bit PNG, values clamped to [0,1] and scaled; 1 channel writes grayscale,
// 3 channels RGB. No transfer curve is applied.
void write_png(const Image& image, const std::filesystem::path& path);

// Reads 8-bit or 16-bit PNG back to doubles in [0,1]; RGB(A) to 3 channels,
// gray to 1.
Image read_png(const std::filesystem::path& path);

// Portable FloatMap, little-endian, bottom-up rows. 1 channel writes "Pf",
// 3 channels "PF".
void write_pfm(const Image& image, const std::filesystem::path& path);
Image read_pfm(const std::filesystem::path& path);

}  // namespace gvr
