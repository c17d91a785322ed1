#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchmask/patch_grid.hpp"
#include "patchmask/rng.hpp"
#include "patchmask/similarity.hpp"

namespace patchmask {

enum class Strategy { ClusterRGB, ClusterEmbedding, KMeans, Random };

std::string_view to_string(Strategy strategy);
// Accepts the CLI spellings: cluster-rgb, cluster-embedding, kmeans, random.
Strategy parse_strategy(std::string_view name);

struct MaskerConfig {
    Strategy strategy = Strategy::ClusterRGB;
    double anchor_ratio = 0.03;
    double threshold_r = 0.75;
    std::size_t kmeans_k = 12;
    std::size_t kmeans_max_iters = 10;
    double kmeans_mask_fraction = 0.5;
    double random_mask_ratio = 0.5;
    std::size_t embed_dim = 64;  // feature width of the embedding stand-in
    std::uint64_t seed = 0;

    // Throws ConfigError when a field is out of range.
    void validate() const;
};

struct Mask {
    std::vector<std::uint8_t> masked;  // 1 = dropped
    std::vector<std::size_t> anchors;  // ascending; empty for KMeans and Random

    Mask() = default;
    explicit Mask(std::size_t length) : masked(length, 0) {}

    std::size_t length() const { return masked.size(); }
    std::size_t masked_count() const;
    std::size_t visible_count() const { return length() - masked_count(); }
};

// max(1, round(anchor_ratio * L)), capped at L.
std::size_t anchor_count(std::size_t length, double anchor_ratio);

// Anchor-cluster masking: patch j is masked iff it is an anchor or
// sim(a, j) >= threshold for some anchor a.
Mask cluster_mask(const SimilarityMatrix& sim, double anchor_ratio, double threshold_r, Rng& rng);

// Same rule with caller-chosen anchors.
Mask cluster_mask_with_anchors(const SimilarityMatrix& sim, std::span<const std::size_t> anchors, double threshold_r);

struct KMeansResult {
    std::size_t k = 0;  // clusters actually used (reduced when too few distinct points)
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> centroids;       // k x dim
    std::vector<std::size_t> assignment; // per point
};

// Lloyd's algorithm on squared Euclidean distance. Initial centroids are k
// distinct point vectors sampled uniformly; empty clusters are re-seeded from
// the point farthest from its centroid. The returned assignment is always the
// nearest-centroid assignment for the returned centroids.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::size_t max_iters, Rng& rng);

// Runs kmeans and fully masks ceil(mask_fraction * k) clusters picked uniformly.
// Throws DegenerateInput when there are fewer points than k.
Mask kmeans_mask(const FeatureGrid& features, std::size_t k, std::size_t max_iters, double mask_fraction, Rng& rng,
                 KMeansResult* details = nullptr, std::vector<std::size_t>* masked_clusters = nullptr);
Mask kmeans_mask(const PatchGrid& grid, std::size_t k, std::size_t max_iters, double mask_fraction, Rng& rng,
                 KMeansResult* details = nullptr, std::vector<std::size_t>* masked_clusters = nullptr);

// Exactly round(ratio * L) positions masked uniformly at random.
Mask random_mask(std::size_t length, double ratio, Rng& rng);

double mask_ratio(const Mask& mask);

// One line of '0'/'1' characters.
std::string mask_to_string(const Mask& mask);
Mask mask_from_string(std::string_view line);

// Similarity the cluster strategies threshold: RGB cosine of the normalized
// grid, blended with the embedding stand-in's cosine for ClusterEmbedding.
SimilarityMatrix masking_similarity(const PatchGrid& normalized, const MaskerConfig& config, double alpha = 1.0);

// Full per-image pipeline for the configured strategy. `alpha` is the blend
// weight given to RGB similarity under ClusterEmbedding.
Mask make_mask(const Image& image, std::size_t patch_size, const MaskerConfig& config, Rng& rng, double alpha = 1.0);

}  // namespace patchmask
