#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>

#include "patchmask/cluster_masker.hpp"

namespace patchmask {

inline constexpr std::size_t kHistogramBins = 20;

struct MaskStats {
    std::size_t count = 0;
    double mean_ratio = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::array<std::size_t, kHistogramBins> histogram{};  // bins over [0, 1], 1.0 lands in the last
    double mean_cluster_count = 0.0;
};

// Masked clusters are 4-connected components of masked patches on the square
// grid (or maximal runs when L is not a perfect square).
std::size_t count_clusters(const Mask& mask);

MaskStats stats_report(std::span<const Mask> masks);

void write_stats_text(std::ostream& out, const MaskStats& stats);

}  // namespace patchmask
