#include "patchmask/batch_shaping.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "patchmask/error.hpp"

namespace patchmask {

std::size_t ShapedBatch::real_count(std::size_t image) const {
    return static_cast<std::size_t>(std::count(attention[image].begin(), attention[image].end(), std::uint8_t{1}));
}

std::size_t visible_slots(std::size_t length, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    // round the masked count up so the minimum ratio is honored; the small
    // slack keeps products like 0.3 * 10 from rounding to 4
    const auto masked = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(length) - 1e-9));
    return length - std::min(length, masked);
}

ShapedBatch shape_batch(std::span<const Mask> masks, double beta, Rng& rng) {
    ShapedBatch out;
    out.batch = masks.size();
    out.beta = beta;
    out.length = masks.empty() ? 0 : masks.front().length();
    out.slots = visible_slots(out.length, beta);

    const std::uint64_t base = rng.next();
    out.kept_indices.reserve(masks.size());
    out.attention.reserve(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const Mask& mask = masks[i];
        if (mask.length() != out.length) throw SizeMismatch("shape_batch: masks have different lengths");

        std::vector<std::size_t> visible;
        for (std::size_t p = 0; p < mask.length(); ++p) {
            if (!mask.masked[p]) visible.push_back(p);
        }

        std::vector<std::size_t> kept;
        if (visible.size() > out.slots) {
            Rng image_rng(derive_seed(base, i));
            for (std::size_t k : image_rng.sample_without_replacement(visible.size(), out.slots)) kept.push_back(visible[k]);
        } else {
            kept = std::move(visible);
        }

        std::vector<std::uint8_t> attn(out.slots, 0);
        std::fill_n(attn.begin(), kept.size(), std::uint8_t{1});
        kept.resize(out.slots, out.padding_index());

        out.kept_indices.push_back(std::move(kept));
        out.attention.push_back(std::move(attn));
    }
    return out;
}

std::vector<double> gather_slots(const PatchGrid& grid, const ShapedBatch& batch, std::size_t image) {
    if (grid.count() != batch.length) throw SizeMismatch("gather_slots: grid does not match the batch length");
    const std::size_t dim = grid.patch_dim();
    std::vector<double> out(batch.slots * dim, 0.0);
    for (std::size_t s = 0; s < batch.slots; ++s) {
        if (!batch.attention[image][s]) continue;
        const auto src = grid.patch(batch.kept_indices[image][s]);
        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(s * dim));
    }
    return out;
}

void write_shaped_batch(std::ostream& out, const ShapedBatch& batch) {
    for (std::size_t i = 0; i < batch.batch; ++i) {
        out << "kept: ";
        for (std::size_t s = 0; s < batch.slots; ++s) {
            if (s) out << ',';
            out << batch.kept_indices[i][s];
        }
        out << "\nattn: ";
        for (std::uint8_t a : batch.attention[i]) out << (a ? '1' : '0');
        out << '\n';
    }
}

}  // namespace patchmask
