#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "patchmask/cluster_masker.hpp"
#include "patchmask/patch_grid.hpp"
#include "patchmask/rng.hpp"

namespace patchmask {

// Fixed-width view of a batch of masks: every image gets `slots` entries.
// Real entries are ascending patch indices; padding entries come last, hold
// the sentinel `length` and have attention 0.
struct ShapedBatch {
    std::size_t batch = 0;
    std::size_t slots = 0;
    std::size_t length = 0;
    double beta = 0.0;
    std::vector<std::vector<std::size_t>> kept_indices;
    std::vector<std::vector<std::uint8_t>> attention;

    std::size_t padding_index() const { return length; }
    std::size_t real_count(std::size_t image) const;
};

// L - ceil(beta * L)
std::size_t visible_slots(std::size_t length, double beta);

ShapedBatch shape_batch(std::span<const Mask> masks, double beta, Rng& rng);

// Visible patches of one image in slot order; padding slots are zero vectors.
std::vector<double> gather_slots(const PatchGrid& grid, const ShapedBatch& batch, std::size_t image);

// Debug dump: per image a `kept: ...` line and an `attn: ...` line.
void write_shaped_batch(std::ostream& out, const ShapedBatch& batch);

}  // namespace patchmask
