#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "patchmask/patch_grid.hpp"
#include "patchmask/toy_contrastive.hpp"

namespace patchmask {

// Natural-statistics stand-in: bilinearly upsampled coarse noise with a
// random correlation length plus a little fine-grained noise, clamped to [0, 1].
Image smoothed_noise_image(std::size_t height, std::size_t width, std::size_t channels, std::uint64_t seed);

struct ColorCaptionOptions {
    std::size_t count = 16;
    std::size_t image_size = 32;   // square, split into 2 x 2 colored blocks
    std::size_t palette_size = 6;  // caption vocabulary size
    std::uint64_t seed = 0;
};

// Images made of four textured, colored blocks. The caption of an image is the
// bag of its block colors, so captions are a deterministic function of pixels.
std::vector<TrainingExample> color_caption_dataset(const ColorCaptionOptions& options);

}  // namespace patchmask
