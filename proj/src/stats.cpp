#include "patchmask/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace patchmask {

std::size_t count_clusters(const Mask& mask) {
    const std::size_t n = mask.length();
    auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) {
        std::size_t runs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask.masked[i] && (i == 0 || !mask.masked[i - 1])) ++runs;
        }
        return runs;
    }

    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::size_t> stack;
    std::size_t clusters = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (!mask.masked[start] || seen[start]) continue;
        ++clusters;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t r = p / side, c = p % side;
            const std::size_t neighbors[4] = {r > 0 ? p - side : n, r + 1 < side ? p + side : n,
                                              c > 0 ? p - 1 : n, c + 1 < side ? p + 1 : n};
            for (std::size_t q : neighbors) {
                if (q < n && mask.masked[q] && !seen[q]) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            }
        }
    }
    return clusters;
}

MaskStats stats_report(std::span<const Mask> masks) {
    if (masks.empty()) throw std::invalid_argument("stats_report: no masks");
    MaskStats stats;
    stats.count = masks.size();
    stats.min_ratio = 1.0;
    stats.max_ratio = 0.0;
    double ratio_sum = 0.0;
    double cluster_sum = 0.0;
    for (const Mask& m : masks) {
        const double r = mask_ratio(m);
        ratio_sum += r;
        stats.min_ratio = std::min(stats.min_ratio, r);
        stats.max_ratio = std::max(stats.max_ratio, r);
        const auto bin = std::min(kHistogramBins - 1, static_cast<std::size_t>(r * static_cast<double>(kHistogramBins)));
        ++stats.histogram[bin];
        cluster_sum += static_cast<double>(count_clusters(m));
    }
    stats.mean_ratio = ratio_sum / static_cast<double>(masks.size());
    stats.mean_cluster_count = cluster_sum / static_cast<double>(masks.size());
    return stats;
}

void write_stats_text(std::ostream& out, const MaskStats& stats) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "masks: %zu\nmean ratio: %.6f\nmin ratio: %.6f\nmax ratio: %.6f\n", stats.count,
                  stats.mean_ratio, stats.min_ratio, stats.max_ratio);
    out << buf;
    std::snprintf(buf, sizeof buf, "mean clusters: %.4f\nhistogram:\n", stats.mean_cluster_count);
    out << buf;
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
        const double lo = static_cast<double>(b) / kHistogramBins;
        const double hi = static_cast<double>(b + 1) / kHistogramBins;
        std::snprintf(buf, sizeof buf, "  [%.2f, %.2f%c %zu\n", lo, hi, b + 1 == kHistogramBins ? ']' : ')',
                      stats.histogram[b]);
        out << buf;
    }
}

}  // namespace patchmask
