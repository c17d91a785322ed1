#include "patchmask/patch_grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "patchmask/error.hpp"

namespace patchmask {

PatchGrid::PatchGrid(std::size_t rows, std::size_t cols, std::size_t patch_size, std::size_t channels)
    : rows_(rows),
      cols_(cols),
      patch_size_(patch_size),
      channels_(channels),
      patch_dim_(patch_size * patch_size * channels),
      values_(rows * cols * patch_size * patch_size * channels, 0.0) {}

PatchGrid patchify(const Image& image, std::size_t patch_size) {
    if (patch_size == 0 || image.height == 0 || image.width == 0 || image.height % patch_size != 0 ||
        image.width % patch_size != 0) {
        throw DimensionMismatch("patch size " + std::to_string(patch_size) + " does not divide image of " +
                                std::to_string(image.height) + "x" + std::to_string(image.width));
    }
    if (image.data.size() != image.height * image.width * image.channels) {
        throw DimensionMismatch("image buffer does not match its dimensions");
    }

    PatchGrid grid(image.height / patch_size, image.width / patch_size, patch_size, image.channels);
    const std::size_t row_len = patch_size * image.channels;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            auto dst = grid.patch(r * grid.cols() + c);
            for (std::size_t dy = 0; dy < patch_size; ++dy) {
                const double* src = &image.data[((r * patch_size + dy) * image.width + c * patch_size) * image.channels];
                std::copy(src, src + row_len, dst.begin() + dy * row_len);
            }
        }
    }
    return grid;
}

Image unpatchify(const PatchGrid& grid) {
    const std::size_t ps = grid.patch_size();
    Image image(grid.rows() * ps, grid.cols() * ps, grid.channels());
    const std::size_t row_len = ps * grid.channels();
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            auto src = grid.patch(r * grid.cols() + c);
            for (std::size_t dy = 0; dy < ps; ++dy) {
                double* dst = &image.data[((r * ps + dy) * image.width + c * ps) * image.channels];
                std::copy(src.begin() + dy * row_len, src.begin() + (dy + 1) * row_len, dst);
            }
        }
    }
    return image;
}

void normalize_patch(std::span<double> patch) {
    if (patch.empty()) return;
    const double n = static_cast<double>(patch.size());
    const double mean = std::accumulate(patch.begin(), patch.end(), 0.0) / n;
    double var = 0.0;
    for (double v : patch) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / n);  // population
    if (stddev < kConstantPatchStd) {
        std::fill(patch.begin(), patch.end(), 0.0);
        return;
    }
    for (double& v : patch) v = (v - mean) / stddev;
}

PatchGrid pixel_normalize(PatchGrid grid) {
    if (grid.normalized()) throw std::invalid_argument("pixel_normalize: grid is already normalized");
    for (std::size_t i = 0; i < grid.count(); ++i) normalize_patch(grid.patch(i));
    grid.set_normalized(true);
    return grid;
}

}  // namespace patchmask
