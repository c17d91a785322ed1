#include "patchmask/similarity.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "patchmask/error.hpp"
#include "patchmask/rng.hpp"

namespace patchmask {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

SimilarityMatrix cosine_rows(const double* data, std::size_t count, std::size_t dim) {
    if (count == 0) throw std::invalid_argument("cosine_matrix: empty input");
    std::vector<double> norms(count);
    for (std::size_t i = 0; i < count; ++i) norms[i] = std::sqrt(dot(data + i * dim, data + i * dim, dim));

    SimilarityMatrix sim(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double* xi = data + i * dim;
        for (std::size_t j = i; j < count; ++j) {
            double value = 0.0;
            if (norms[i] > 0.0 && norms[j] > 0.0) {
                value = dot(xi, data + j * dim, dim) / (norms[i] * norms[j] + kCosineEpsilon);
            }
            sim(i, j) = value;
            sim(j, i) = value;
        }
    }
    return sim;
}

}  // namespace

SimilarityMatrix cosine_matrix(const PatchGrid& grid) {
    if (!grid.normalized()) throw std::invalid_argument("cosine_matrix: patch grid must be pixel-normalized");
    return cosine_rows(grid.values().data(), grid.count(), grid.patch_dim());
}

SimilarityMatrix cosine_matrix(const FeatureGrid& grid) {
    if (grid.features.size() != grid.count * grid.dim) throw SizeMismatch("feature grid buffer size mismatch");
    std::vector<double> unit = grid.features;
    for (std::size_t i = 0; i < grid.count; ++i) {
        double* v = unit.data() + i * grid.dim;
        const double norm = std::sqrt(dot(v, v, grid.dim));
        if (norm == 0.0) continue;
        for (std::size_t k = 0; k < grid.dim; ++k) v[k] /= norm;
    }
    return cosine_rows(unit.data(), grid.count, grid.dim);
}

SimilarityMatrix blend(const SimilarityMatrix& rgb, const SimilarityMatrix& emb, double alpha) {
    if (rgb.size() != emb.size()) {
        throw SizeMismatch("blend: matrix sizes differ (" + std::to_string(rgb.size()) + " vs " +
                           std::to_string(emb.size()) + ")");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("blend: alpha must lie in [0, 1]");
    SimilarityMatrix out(rgb.size());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        for (std::size_t j = 0; j < rgb.size(); ++j) {
            out(i, j) = alpha * rgb(i, j) + (1.0 - alpha) * emb(i, j);
        }
    }
    return out;
}

FeatureGrid sinusoidal_positions(std::size_t rows, std::size_t cols, std::size_t dim) {
    if (dim == 0 || dim % 4 != 0) throw ConfigError("embedding dim must be a positive multiple of 4");
    FeatureGrid pos{rows * cols, dim, std::vector<double>(rows * cols * dim, 0.0)};
    const std::size_t half = dim / 2;
    // first half encodes the row, second half the column; each as sin/cos pairs
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            auto f = pos.feature(r * cols + c);
            for (std::size_t k = 0; k < half / 2; ++k) {
                const double freq = 1.0 / std::pow(10000.0, static_cast<double>(2 * k) / static_cast<double>(half));
                f[2 * k] = std::sin(static_cast<double>(r) * freq);
                f[2 * k + 1] = std::cos(static_cast<double>(r) * freq);
                f[half + 2 * k] = std::sin(static_cast<double>(c) * freq);
                f[half + 2 * k + 1] = std::cos(static_cast<double>(c) * freq);
            }
        }
    }
    return pos;
}

FeatureGrid toy_patch_embedding(const PatchGrid& grid, std::uint64_t projection_seed, std::size_t dim) {
    if (grid.count() == 0) throw std::invalid_argument("toy_patch_embedding: empty grid");
    FeatureGrid out = sinusoidal_positions(grid.rows(), grid.cols(), dim);

    const std::size_t in_dim = grid.patch_dim();
    Rng rng(projection_seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::vector<double> projection(dim * in_dim);
    for (double& w : projection) w = rng.normal() * scale;

    for (std::size_t p = 0; p < grid.count(); ++p) {
        const auto x = grid.patch(p);
        auto f = out.feature(p);
        for (std::size_t d = 0; d < dim; ++d) f[d] += dot(&projection[d * in_dim], x.data(), in_dim);
    }
    return out;
}

void write_tsv(std::ostream& out, const SimilarityMatrix& sim) {
    char buf[32];
    for (std::size_t i = 0; i < sim.size(); ++i) {
        for (std::size_t j = 0; j < sim.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", sim(i, j));
            if (j) out << '\t';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace patchmask
