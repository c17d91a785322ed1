#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "patchmask/batch_shaping.hpp"
#include "patchmask/cluster_masker.hpp"
#include "patchmask/patch_grid.hpp"
#include "patchmask/rng.hpp"

namespace patchmask {

inline constexpr double kDefaultTemperature = 0.07;

struct EmbeddingPair {
    std::vector<double> image;  // unit norm
    std::vector<double> text;   // unit norm
};

struct TrainState {
    std::size_t epoch_current = 0;
    std::size_t epoch_total = 1;
    double alpha_exponent = 1.0;
    double temperature = kDefaultTemperature;
    std::size_t step = 0;
};

// (E_c / E_t)^k, the RGB weight of the blended similarity.
double alpha_schedule(const TrainState& state);

// Image-to-text InfoNCE: each image is scored against every caption in the batch.
double info_nce_v2l(std::span<const EmbeddingPair> pairs, double tau);
// Text-to-image InfoNCE: each caption is scored against every image.
double info_nce_l2v(std::span<const EmbeddingPair> pairs, double tau);
// 0.5 * (v2l + l2v)
double info_nce_symmetric(std::span<const EmbeddingPair> pairs, double tau);

// Affine map followed by L2 normalization: out = (W x + b) / |W x + b|.
struct ToyEncoder {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // out_dim x in_dim, row-major
    std::vector<double> bias;     // out_dim

    ToyEncoder() = default;
    ToyEncoder(std::size_t in, std::size_t out) : in_dim(in), out_dim(out), weights(in * out, 0.0), bias(out, 0.0) {}

    // Gaussian init with std 1/sqrt(in_dim).
    static ToyEncoder random(std::size_t in, std::size_t out, Rng& rng);

    std::vector<double> pre_activation(std::span<const double> x) const;
    std::vector<double> encode(std::span<const double> x) const;
};

struct ToyModel {
    ToyEncoder image;
    ToyEncoder text;
};

// Both encoders drawn from one seed.
ToyModel make_toy_model(std::size_t image_in, std::size_t text_in, std::size_t embed_dim, std::uint64_t seed);

struct ModelGradient {
    ToyEncoder image;  // same shapes as the model, holding dL/dparam
    ToyEncoder text;
};

// One (image, caption) training example. The caption is a bag of token counts.
struct TrainingExample {
    Image image;
    std::vector<double> tokens;
};

// Mean of the attended slot vectors of one image; zeros when nothing is visible.
std::vector<double> pool_visible(const PatchGrid& grid, const ShapedBatch& shaped, std::size_t image);

struct LossResult {
    double loss = 0.0;
    ModelGradient gradient;
};

// Symmetric InfoNCE of the batch under fixed shaped masks, with analytic
// gradients. Only attended slots reach the image encoder.
LossResult contrastive_loss(const ToyModel& model, std::span<const PatchGrid> grids, const ShapedBatch& shaped,
                            std::span<const std::vector<double>> tokens, double tau);

struct TrainConfig {
    MaskerConfig masker;
    std::size_t patch_size = 8;
    double beta = 0.5;
    double learning_rate = 0.5;
};

struct StepResult {
    double loss = 0.0;
    double alpha = 0.0;
    double mean_mask_ratio = 0.0;
};

// Masks every image with sub-seeds derived from (masker seed, step), shapes
// the batch, evaluates the symmetric loss at state.temperature and applies one
// gradient step. The RGB blend weight comes from alpha_schedule(state).
StepResult train_step(ToyModel& model, std::span<const TrainingExample> batch, const TrainConfig& config,
                      TrainState& state);

}  // namespace patchmask
