#include "patchmask/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "patchmask/rng.hpp"

namespace patchmask {

Image smoothed_noise_image(std::size_t height, std::size_t width, std::size_t channels, std::uint64_t seed) {
    Rng rng(seed);
    static constexpr std::array<std::size_t, 4> kCellSizes = {8, 16, 28, 56};
    const std::size_t cell = kCellSizes[rng.uniform_index(kCellSizes.size())];
    const std::size_t grid_h = height / cell + 2;
    const std::size_t grid_w = width / cell + 2;

    // per-channel coarse lattice around a shared base so channels stay correlated
    std::vector<double> lattice(grid_h * grid_w * channels);
    for (std::size_t k = 0; k < grid_h * grid_w; ++k) {
        const double base = rng.uniform01();
        for (std::size_t c = 0; c < channels; ++c) {
            lattice[k * channels + c] = std::clamp(base + 0.25 * (rng.uniform01() - 0.5), 0.0, 1.0);
        }
    }

    const double fine = 0.02 + 0.06 * rng.uniform01();
    Image image(height, width, channels);
    for (std::size_t y = 0; y < height; ++y) {
        const double gy = static_cast<double>(y) / static_cast<double>(cell);
        const auto y0 = static_cast<std::size_t>(gy);
        const double ty = gy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            const double gx = static_cast<double>(x) / static_cast<double>(cell);
            const auto x0 = static_cast<std::size_t>(gx);
            const double tx = gx - static_cast<double>(x0);
            for (std::size_t c = 0; c < channels; ++c) {
                auto at = [&](std::size_t gyi, std::size_t gxi) { return lattice[(gyi * grid_w + gxi) * channels + c]; };
                const double top = at(y0, x0) * (1.0 - tx) + at(y0, x0 + 1) * tx;
                const double bottom = at(y0 + 1, x0) * (1.0 - tx) + at(y0 + 1, x0 + 1) * tx;
                const double v = top * (1.0 - ty) + bottom * ty + fine * rng.normal();
                image.at(y, x, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return image;
}

std::vector<TrainingExample> color_caption_dataset(const ColorCaptionOptions& options) {
    static constexpr std::array<std::array<double, 3>, 8> kPalette = {{
        {0.85, 0.15, 0.15},
        {0.15, 0.75, 0.20},
        {0.20, 0.25, 0.85},
        {0.90, 0.85, 0.20},
        {0.80, 0.30, 0.80},
        {0.20, 0.80, 0.80},
        {0.95, 0.55, 0.10},
        {0.45, 0.45, 0.45},
    }};
    const std::size_t palette = std::min(options.palette_size, kPalette.size());
    const std::size_t half = options.image_size / 2;

    Rng rng(options.seed);
    std::vector<TrainingExample> data;
    data.reserve(options.count);
    for (std::size_t n = 0; n < options.count; ++n) {
        TrainingExample ex;
        ex.image = Image(options.image_size, options.image_size, 3);
        ex.tokens.assign(palette, 0.0);
        for (std::size_t block = 0; block < 4; ++block) {
            const std::size_t color = rng.uniform_index(palette);
            const bool vertical = rng.uniform_index(2) == 1;
            const double period = 2.0 + static_cast<double>(rng.uniform_index(3));
            ex.tokens[color] += 1.0;
            const std::size_t by = (block / 2) * half;
            const std::size_t bx = (block % 2) * half;
            for (std::size_t y = by; y < by + half; ++y) {
                for (std::size_t x = bx; x < bx + half; ++x) {
                    const double phase = static_cast<double>(vertical ? x : y) / period;
                    const double stripe = 0.12 * std::sin(2.0 * 3.14159265358979323846 * phase);
                    for (std::size_t c = 0; c < 3; ++c) {
                        const double v = kPalette[color][c] + stripe + 0.03 * rng.normal();
                        ex.image.at(y, x, c) = std::clamp(v, 0.0, 1.0);
                    }
                }
            }
        }
        data.push_back(std::move(ex));
    }
    return data;
}

}  // namespace patchmask
