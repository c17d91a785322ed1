#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patchmask {

// Interleaved image: data[(y * width + x) * channels + c], intensities in [0, 1].
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), data(h * w * c, fill) {}

    double& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
    double at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }
};

// Image split into rows x cols square patches. Patch p = r * cols + c is stored
// contiguously; within a patch the order is row-major over pixels with the
// channel index varying fastest: offset = (dy * patch_size + dx) * channels + ch.
class PatchGrid {
public:
    PatchGrid() = default;
    PatchGrid(std::size_t rows, std::size_t cols, std::size_t patch_size, std::size_t channels);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t patch_size() const { return patch_size_; }
    std::size_t channels() const { return channels_; }
    std::size_t patch_dim() const { return patch_dim_; }
    std::size_t count() const { return rows_ * cols_; }
    bool normalized() const { return normalized_; }

    std::span<const double> patch(std::size_t index) const {
        return {values_.data() + index * patch_dim_, patch_dim_};
    }
    std::span<double> patch(std::size_t index) { return {values_.data() + index * patch_dim_, patch_dim_}; }

    std::span<const double> values() const { return values_; }

    void set_normalized(bool flag) { normalized_ = flag; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t patch_size_ = 0;
    std::size_t channels_ = 0;
    std::size_t patch_dim_ = 0;
    bool normalized_ = false;
    std::vector<double> values_;
};

// Standard deviations below this are treated as constant patches.
inline constexpr double kConstantPatchStd = 1e-8;

// Throws DimensionMismatch unless patch_size divides both image dimensions.
PatchGrid patchify(const Image& image, std::size_t patch_size);

// Inverse of patchify.
Image unpatchify(const PatchGrid& grid);

// Standardizes one vector in place to zero mean and unit population std;
// near-constant vectors become all zeros.
void normalize_patch(std::span<double> patch);

// Per-patch standardization over the whole flattened patch. Requires an
// unnormalized grid.
PatchGrid pixel_normalize(PatchGrid grid);

}  // namespace patchmask
