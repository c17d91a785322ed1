#include "patchmask/cluster_masker.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "patchmask/error.hpp"

namespace patchmask {
namespace {

// Stream index reserved for the frozen embedding projection.
constexpr std::uint64_t kProjectionStream = 0x70726f6aULL;

double squared_distance(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

// Index of the first occurrence of every distinct row.
std::vector<std::size_t> distinct_rows(std::span<const double> points, std::size_t dim, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto row = [&](std::size_t i) { return points.begin() + static_cast<std::ptrdiff_t>(i * dim); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(row(a), row(a) + dim, row(b), row(b) + dim);
    });
    std::vector<std::size_t> firsts;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || !std::equal(row(order[i]), row(order[i]) + dim, row(order[i - 1]))) firsts.push_back(order[i]);
    }
    std::sort(firsts.begin(), firsts.end());
    return firsts;
}

// Returns true when any assignment changed.
bool assign_nearest(std::span<const double> points, std::size_t dim, std::size_t n, const std::vector<double>& centroids,
                    std::size_t k, std::vector<std::size_t>& assignment) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double d = squared_distance(&points[i * dim], &centroids[c * dim], dim);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (assignment[i] != best) {
            assignment[i] = best;
            changed = true;
        }
    }
    return changed;
}

void update_centroids(std::span<const double> points, std::size_t dim, std::size_t n, std::size_t k,
                      const std::vector<std::size_t>& assignment, std::vector<double>& centroids) {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = assignment[i];
        ++sizes[c];
        for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += points[i * dim + d];
    }

    std::vector<double> dist_to_own(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        dist_to_own[i] = squared_distance(&points[i * dim], &centroids[assignment[i] * dim], dim);
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] > 0) {
            for (std::size_t d = 0; d < dim; ++d) centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(sizes[c]);
            continue;
        }
        // empty cluster: re-seed from the point farthest from its centroid
        const auto far = static_cast<std::size_t>(
            std::distance(dist_to_own.begin(), std::max_element(dist_to_own.begin(), dist_to_own.end())));
        std::copy_n(&points[far * dim], dim, &centroids[c * dim]);
        dist_to_own[far] = 0.0;
    }
}

std::size_t masked_cluster_count(double fraction, std::size_t k) {
    const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(k) - 1e-9));
    return std::clamp<std::size_t>(m, 1, k);
}

Mask kmeans_mask_impl(std::span<const double> points, std::size_t n, std::size_t dim, std::size_t k,
                      std::size_t max_iters, double mask_fraction, Rng& rng, KMeansResult* details,
                      std::vector<std::size_t>* masked_clusters) {
    if (k < 2) throw ConfigError("kmeans_mask: k must be at least 2");
    if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) throw ConfigError("kmeans_mask: mask fraction must lie in (0, 1)");
    if (n < k) {
        throw DegenerateInput("kmeans_mask: " + std::to_string(n) + " patches cannot form " + std::to_string(k) +
                              " clusters");
    }

    KMeansResult result = kmeans(points, dim, k, max_iters, rng);
    std::vector<std::size_t> chosen = rng.sample_without_replacement(result.k, masked_cluster_count(mask_fraction, result.k));

    Mask mask(n);
    std::vector<std::uint8_t> drop(result.k, 0);
    for (std::size_t c : chosen) drop[c] = 1;
    for (std::size_t i = 0; i < n; ++i) mask.masked[i] = drop[result.assignment[i]];

    if (masked_clusters) *masked_clusters = std::move(chosen);
    if (details) *details = std::move(result);
    return mask;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::ClusterRGB: return "cluster-rgb";
        case Strategy::ClusterEmbedding: return "cluster-embedding";
        case Strategy::KMeans: return "kmeans";
        case Strategy::Random: return "random";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : {Strategy::ClusterRGB, Strategy::ClusterEmbedding, Strategy::KMeans, Strategy::Random}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown masking strategy '" + std::string(name) + "'");
}

void MaskerConfig::validate() const {
    if (!(anchor_ratio > 0.0 && anchor_ratio <= 0.5)) throw ConfigError("anchor_ratio must lie in (0, 0.5]");
    if (!std::isfinite(threshold_r)) throw ConfigError("threshold_r must be finite");
    if (kmeans_k < 2) throw ConfigError("kmeans_k must be at least 2");
    if (!(kmeans_mask_fraction > 0.0 && kmeans_mask_fraction < 1.0)) {
        throw ConfigError("kmeans_mask_fraction must lie in (0, 1)");
    }
    if (!(random_mask_ratio > 0.0 && random_mask_ratio < 1.0)) throw ConfigError("random_mask_ratio must lie in (0, 1)");
    if (embed_dim == 0 || embed_dim % 4 != 0) throw ConfigError("embed_dim must be a positive multiple of 4");
}

std::size_t Mask::masked_count() const {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), std::uint8_t{1}));
}

std::size_t anchor_count(std::size_t length, double anchor_ratio) {
    const auto rounded = static_cast<std::size_t>(std::llround(anchor_ratio * static_cast<double>(length)));
    return std::min(length, std::max<std::size_t>(1, rounded));
}

Mask cluster_mask_with_anchors(const SimilarityMatrix& sim, std::span<const std::size_t> anchors, double threshold_r) {
    Mask mask(sim.size());
    for (std::size_t a : anchors) {
        if (a >= sim.size()) throw std::out_of_range("cluster_mask: anchor index out of range");
        mask.masked[a] = 1;
        const auto row = sim.row(a);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] >= threshold_r) mask.masked[j] = 1;
        }
    }
    mask.anchors.assign(anchors.begin(), anchors.end());
    std::sort(mask.anchors.begin(), mask.anchors.end());
    return mask;
}

Mask cluster_mask(const SimilarityMatrix& sim, double anchor_ratio, double threshold_r, Rng& rng) {
    if (sim.size() == 0) throw std::invalid_argument("cluster_mask: empty similarity matrix");
    if (!(anchor_ratio > 0.0 && anchor_ratio < 1.0)) throw ConfigError("cluster_mask: anchor_ratio must lie in (0, 1)");
    const auto anchors = rng.sample_without_replacement(sim.size(), anchor_count(sim.size(), anchor_ratio));
    return cluster_mask_with_anchors(sim, anchors, threshold_r);
}

KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::size_t max_iters, Rng& rng) {
    if (dim == 0 || points.size() % dim != 0) throw SizeMismatch("kmeans: point buffer is not a multiple of dim");
    const std::size_t n = points.size() / dim;
    if (n < k) throw DegenerateInput("kmeans: fewer points than clusters");

    const auto distinct = distinct_rows(points, dim, n);
    KMeansResult result;
    result.k = std::min(k, distinct.size());
    if (result.k < k) {
        std::clog << "warning: only " << distinct.size() << " distinct patches; reducing k from " << k << " to "
                  << result.k << '\n';
    }

    const auto seeds = rng.sample_without_replacement(distinct.size(), result.k);
    result.centroids.resize(result.k * dim);
    for (std::size_t c = 0; c < result.k; ++c) std::copy_n(&points[distinct[seeds[c]] * dim], dim, &result.centroids[c * dim]);

    result.assignment.assign(n, std::numeric_limits<std::size_t>::max());
    bool fresh = true;  // centroids changed since the last assignment
    for (std::size_t it = 0; it < max_iters; ++it) {
        const bool changed = assign_nearest(points, dim, n, result.centroids, result.k, result.assignment);
        fresh = false;
        result.iterations = it + 1;
        if (!changed) {
            result.converged = true;
            break;
        }
        update_centroids(points, dim, n, result.k, result.assignment, result.centroids);
        fresh = true;
    }
    if (fresh) assign_nearest(points, dim, n, result.centroids, result.k, result.assignment);
    return result;
}

Mask kmeans_mask(const FeatureGrid& features, std::size_t k, std::size_t max_iters, double mask_fraction, Rng& rng,
                 KMeansResult* details, std::vector<std::size_t>* masked_clusters) {
    return kmeans_mask_impl(features.features, features.count, features.dim, k, max_iters, mask_fraction, rng, details,
                            masked_clusters);
}

Mask kmeans_mask(const PatchGrid& grid, std::size_t k, std::size_t max_iters, double mask_fraction, Rng& rng,
                 KMeansResult* details, std::vector<std::size_t>* masked_clusters) {
    return kmeans_mask_impl(grid.values(), grid.count(), grid.patch_dim(), k, max_iters, mask_fraction, rng, details,
                            masked_clusters);
}

Mask random_mask(std::size_t length, double ratio, Rng& rng) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("random_mask: ratio must lie in (0, 1)");
    const auto count = std::min<std::size_t>(length, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(length))));
    Mask mask(length);
    for (std::size_t i : rng.sample_without_replacement(length, count)) mask.masked[i] = 1;
    return mask;
}

double mask_ratio(const Mask& mask) {
    if (mask.length() == 0) throw std::invalid_argument("mask_ratio: empty mask");
    return static_cast<double>(mask.masked_count()) / static_cast<double>(mask.length());
}

std::string mask_to_string(const Mask& mask) {
    std::string line(mask.length(), '0');
    for (std::size_t i = 0; i < mask.length(); ++i) {
        if (mask.masked[i]) line[i] = '1';
    }
    return line;
}

Mask mask_from_string(std::string_view line) {
    Mask mask(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '1') {
            mask.masked[i] = 1;
        } else if (line[i] != '0') {
            throw ParseError("mask line holds a character other than '0' or '1'", i);
        }
    }
    return mask;
}

SimilarityMatrix masking_similarity(const PatchGrid& normalized, const MaskerConfig& config, double alpha) {
    if (config.strategy != Strategy::ClusterEmbedding) return cosine_matrix(normalized);
    const auto features = toy_patch_embedding(normalized, derive_seed(config.seed, kProjectionStream), config.embed_dim);
    return blend(cosine_matrix(normalized), cosine_matrix(features), alpha);
}

Mask make_mask(const Image& image, std::size_t patch_size, const MaskerConfig& config, Rng& rng, double alpha) {
    const PatchGrid grid = pixel_normalize(patchify(image, patch_size));
    switch (config.strategy) {
        case Strategy::ClusterRGB:
        case Strategy::ClusterEmbedding:
            return cluster_mask(masking_similarity(grid, config, alpha), config.anchor_ratio, config.threshold_r, rng);
        case Strategy::KMeans:
            return kmeans_mask(grid, config.kmeans_k, config.kmeans_max_iters, config.kmeans_mask_fraction, rng);
        case Strategy::Random:
            return random_mask(grid.count(), config.random_mask_ratio, rng);
    }
    throw ConfigError("unhandled strategy");
}

}  // namespace patchmask
