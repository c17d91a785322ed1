#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "patchmask/patch_grid.hpp"

namespace patchmask {

// Guard added to the product of norms in the cosine denominator.
inline constexpr double kCosineEpsilon = 1e-8;

// Dense symmetric L x L similarity matrix, row-major.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t size) : size_(size), values_(size * size, 0.0) {}

    std::size_t size() const { return size_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * size_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * size_, size_}; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

// Per-patch feature vectors, e.g. patch embeddings with positional encoding.
struct FeatureGrid {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> features;  // count x dim, row-major

    std::span<const double> feature(std::size_t i) const { return {features.data() + i * dim, dim}; }
    std::span<double> feature(std::size_t i) { return {features.data() + i * dim, dim}; }
};

// <x_i, x_j> / (|x_i| |x_j| + eps). Zero vectors score 0 against everything.
// The patch overload requires a pixel-normalized grid.
SimilarityMatrix cosine_matrix(const PatchGrid& grid);

// Features are L2-normalized first, then scored as above.
SimilarityMatrix cosine_matrix(const FeatureGrid& grid);

// alpha * rgb + (1 - alpha) * emb, elementwise.
SimilarityMatrix blend(const SimilarityMatrix& rgb, const SimilarityMatrix& emb, double alpha);

// Frozen stand-in for a ViT patch-embedding layer: a seeded Gaussian random
// projection of each patch to `dim` features plus a 2-D sinusoidal position
// encoding of the patch's (row, col) grid coordinate.
FeatureGrid toy_patch_embedding(const PatchGrid& grid, std::uint64_t projection_seed, std::size_t dim = 64);

// The additive position term used by toy_patch_embedding.
FeatureGrid sinusoidal_positions(std::size_t rows, std::size_t cols, std::size_t dim);

// Tab-separated dump, one matrix row per line.
void write_tsv(std::ostream& out, const SimilarityMatrix& sim);

}  // namespace patchmask
