#pragma once

#include <filesystem>

#include "bodyfit/image.hpp"

namespace bodyfit {

// Grayscale intensity in [0, 1]; RGB(A) inputs are converted with Rec. 601 luma.
Image<double> load_png_gray(const std::filesystem::path& path);
void save_png_gray(const Image<double>& image, const std::filesystem::path& path);

// Masks are stored as single-channel 8-bit PNG with values 0 / 255; on load
// any value >= 128 counts as set.
Mask load_png_mask(const std::filesystem::path& path);
void save_png_mask(const Mask& mask, const std::filesystem::path& path);

// Little-endian single-channel PFM ("Pf", scale -1). Invalid pixels are
// written as negative infinity and read back as invalid. Rows are stored
// bottom-to-top as the format requires.
DepthMap load_pfm(const std::filesystem::path& path);
void save_pfm(const DepthMap& depth, const std::filesystem::path& path);

}  // namespace bodyfit
