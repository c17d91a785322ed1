#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "patchmask/cluster_masker.hpp"
#include "patchmask/patch_grid.hpp"

namespace patchmask {

// Binary P6 (RGB) or P5 (gray) with maxval <= 255. Intensities are scaled by
// 1/maxval.
Image decode_pnm(std::span<const unsigned char> bytes);
Image load_image(const std::filesystem::path& path);

// Always written with maxval 255; values are rounded to the nearest level.
std::vector<unsigned char> encode_pnm(const Image& image);
void save_image(const std::filesystem::path& path, const Image& image);

// Masked patches become mid-gray; on RGB images every anchor patch gets a
// one-pixel red border.
Image render_mask(const Image& image, const Mask& mask, std::size_t patch_size);

// *.ppm / *.pgm files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

std::vector<Mask> read_masks(const std::filesystem::path& path);
void write_masks(const std::filesystem::path& path, std::span<const Mask> masks);

}  // namespace patchmask
