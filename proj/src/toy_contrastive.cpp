#include "patchmask/toy_contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "patchmask/error.hpp"

namespace patchmask {
namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr std::uint64_t kShapeStream = 0x73686170ULL;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

void check_pairs(std::span<const EmbeddingPair> pairs, double tau) {
    if (pairs.size() < 2) throw std::invalid_argument("InfoNCE needs at least two pairs");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("temperature must be positive and finite");
    const std::size_t dim = pairs.front().image.size();
    for (const auto& p : pairs) {
        if (p.image.size() != dim || p.text.size() != dim) throw SizeMismatch("embedding dimensions differ");
        for (double v : p.image) {
            if (!std::isfinite(v)) throw NonFiniteInput("non-finite image embedding");
        }
        for (double v : p.text) {
            if (!std::isfinite(v)) throw NonFiniteInput("non-finite text embedding");
        }
        if (std::abs(std::sqrt(dot(p.image, p.image)) - 1.0) > kUnitTolerance ||
            std::abs(std::sqrt(dot(p.text, p.text)) - 1.0) > kUnitTolerance) {
            throw std::invalid_argument("InfoNCE expects unit-norm embeddings");
        }
    }
}

// logits(i, j) = I_i . T_j / tau
std::vector<double> logits(std::span<const EmbeddingPair> pairs, double tau) {
    const std::size_t n = pairs.size();
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) s[i * n + j] = dot(pairs[i].image, pairs[j].text) / tau;
    }
    return s;
}

double row_loss(const std::vector<double>& s, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += log_sum_exp(std::span<const double>(s.data() + i * n, n)) - s[i * n + i];
    }
    return total / static_cast<double>(n);
}

std::vector<double> transpose(const std::vector<double>& s, std::size_t n) {
    std::vector<double> t(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[j * n + i] = s[i * n + j];
    }
    return t;
}

std::vector<double> unit(std::vector<double> z, double& norm) {
    norm = std::sqrt(dot(z, z));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NonFiniteInput("encoder output cannot be normalized");
    for (double& v : z) v /= norm;
    return z;
}

// Backpropagates dL/d(unit output) through the normalization and the affine map.
void accumulate_encoder_grad(ToyEncoder& grad, std::span<const double> x, std::span<const double> out, double norm,
                             std::span<const double> g_out) {
    const double proj = dot(g_out, out);
    for (std::size_t d = 0; d < grad.out_dim; ++d) {
        const double dz = (g_out[d] - proj * out[d]) / norm;
        grad.bias[d] += dz;
        double* row = &grad.weights[d * grad.in_dim];
        for (std::size_t k = 0; k < grad.in_dim; ++k) row[k] += dz * x[k];
    }
}

void apply_step(ToyEncoder& enc, const ToyEncoder& grad, double lr) {
    for (std::size_t k = 0; k < enc.weights.size(); ++k) enc.weights[k] -= lr * grad.weights[k];
    for (std::size_t k = 0; k < enc.bias.size(); ++k) enc.bias[k] -= lr * grad.bias[k];
}

}  // namespace

double alpha_schedule(const TrainState& state) {
    if (state.epoch_total == 0) throw ConfigError("alpha_schedule: total epochs must be positive");
    if (state.epoch_current > state.epoch_total) throw ConfigError("alpha_schedule: current epoch exceeds total");
    const double progress = static_cast<double>(state.epoch_current) / static_cast<double>(state.epoch_total);
    return std::pow(progress, state.alpha_exponent);
}

double info_nce_v2l(std::span<const EmbeddingPair> pairs, double tau) {
    check_pairs(pairs, tau);
    return row_loss(logits(pairs, tau), pairs.size());
}

double info_nce_l2v(std::span<const EmbeddingPair> pairs, double tau) {
    check_pairs(pairs, tau);
    return row_loss(transpose(logits(pairs, tau), pairs.size()), pairs.size());
}

double info_nce_symmetric(std::span<const EmbeddingPair> pairs, double tau) {
    check_pairs(pairs, tau);
    const auto s = logits(pairs, tau);
    return 0.5 * (row_loss(s, pairs.size()) + row_loss(transpose(s, pairs.size()), pairs.size()));
}

ToyEncoder ToyEncoder::random(std::size_t in, std::size_t out, Rng& rng) {
    ToyEncoder enc(in, out);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : enc.weights) w = rng.normal() * scale;
    for (double& b : enc.bias) b = rng.normal() * scale;
    return enc;
}

std::vector<double> ToyEncoder::pre_activation(std::span<const double> x) const {
    if (x.size() != in_dim) throw SizeMismatch("encoder input has the wrong dimension");
    std::vector<double> z(bias);
    for (std::size_t d = 0; d < out_dim; ++d) z[d] += dot(std::span<const double>(&weights[d * in_dim], in_dim), x);
    return z;
}

std::vector<double> ToyEncoder::encode(std::span<const double> x) const {
    double norm = 0.0;
    return unit(pre_activation(x), norm);
}

ToyModel make_toy_model(std::size_t image_in, std::size_t text_in, std::size_t embed_dim, std::uint64_t seed) {
    Rng rng(seed);
    ToyModel model;
    model.image = ToyEncoder::random(image_in, embed_dim, rng);
    model.text = ToyEncoder::random(text_in, embed_dim, rng);
    return model;
}

std::vector<double> pool_visible(const PatchGrid& grid, const ShapedBatch& shaped, std::size_t image) {
    if (grid.count() != shaped.length) throw SizeMismatch("pool_visible: grid does not match the batch length");
    std::vector<double> pooled(grid.patch_dim(), 0.0);
    std::size_t used = 0;
    for (std::size_t s = 0; s < shaped.slots; ++s) {
        if (!shaped.attention[image][s]) continue;
        const auto patch = grid.patch(shaped.kept_indices[image][s]);
        for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += patch[k];
        ++used;
    }
    if (used > 0) {
        for (double& v : pooled) v /= static_cast<double>(used);
    }
    return pooled;
}

LossResult contrastive_loss(const ToyModel& model, std::span<const PatchGrid> grids, const ShapedBatch& shaped,
                            std::span<const std::vector<double>> tokens, double tau) {
    const std::size_t n = grids.size();
    if (tokens.size() != n || shaped.batch != n) throw SizeMismatch("contrastive_loss: batch sizes differ");
    if (n < 2) throw std::invalid_argument("contrastive_loss: batch needs at least two examples");
    if (!(tau > 0.0)) throw ConfigError("temperature must be positive");

    std::vector<std::vector<double>> inputs(n), images(n), texts(n);
    std::vector<double> image_norm(n), text_norm(n);
    std::vector<EmbeddingPair> pairs(n);
    for (std::size_t i = 0; i < n; ++i) {
        inputs[i] = pool_visible(grids[i], shaped, i);
        images[i] = unit(model.image.pre_activation(inputs[i]), image_norm[i]);
        texts[i] = unit(model.text.pre_activation(tokens[i]), text_norm[i]);
        pairs[i] = {images[i], texts[i]};
    }

    const auto s = logits(pairs, tau);
    LossResult result;
    result.loss = 0.5 * (row_loss(s, n) + row_loss(transpose(s, n), n));

    // dL/dS(i, j) = (P(i, j) + Q(i, j) - 2 [i == j]) / (2N), P row-softmax, Q column-softmax
    std::vector<double> grad_s(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double lse = log_sum_exp(std::span<const double>(s.data() + i * n, n));
        for (std::size_t j = 0; j < n; ++j) grad_s[i * n + j] += std::exp(s[i * n + j] - lse);
    }
    const auto st = transpose(s, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lse = log_sum_exp(std::span<const double>(st.data() + j * n, n));
        for (std::size_t i = 0; i < n; ++i) grad_s[i * n + j] += std::exp(s[i * n + j] - lse);
    }
    for (std::size_t i = 0; i < n; ++i) grad_s[i * n + i] -= 2.0;
    for (double& g : grad_s) g /= 2.0 * static_cast<double>(n);

    result.gradient.image = ToyEncoder(model.image.in_dim, model.image.out_dim);
    result.gradient.text = ToyEncoder(model.text.in_dim, model.text.out_dim);
    const std::size_t dim = model.image.out_dim;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> g_image(dim, 0.0), g_text(dim, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double gij = grad_s[i * n + j] / tau;  // image i vs text j
            const double gji = grad_s[j * n + i] / tau;  // image j vs text i
            for (std::size_t d = 0; d < dim; ++d) {
                g_image[d] += gij * texts[j][d];
                g_text[d] += gji * images[j][d];
            }
        }
        accumulate_encoder_grad(result.gradient.image, inputs[i], images[i], image_norm[i], g_image);
        accumulate_encoder_grad(result.gradient.text, tokens[i], texts[i], text_norm[i], g_text);
    }
    return result;
}

StepResult train_step(ToyModel& model, std::span<const TrainingExample> batch, const TrainConfig& config,
                      TrainState& state) {
    config.masker.validate();
    StepResult step;
    step.alpha = alpha_schedule(state);

    const std::uint64_t step_seed = derive_seed(config.masker.seed, state.step);
    std::vector<Mask> masks;
    std::vector<PatchGrid> grids;
    std::vector<std::vector<double>> tokens;
    masks.reserve(batch.size());
    grids.reserve(batch.size());
    tokens.reserve(batch.size());
    double ratio_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng rng(derive_seed(step_seed, i));
        masks.push_back(make_mask(batch[i].image, config.patch_size, config.masker, rng, step.alpha));
        ratio_sum += mask_ratio(masks.back());
        grids.push_back(patchify(batch[i].image, config.patch_size));
        tokens.push_back(batch[i].tokens);
    }
    step.mean_mask_ratio = batch.empty() ? 0.0 : ratio_sum / static_cast<double>(batch.size());

    Rng shape_rng(derive_seed(step_seed, kShapeStream));
    const ShapedBatch shaped = shape_batch(masks, config.beta, shape_rng);
    const LossResult result = contrastive_loss(model, grids, shaped, tokens, state.temperature);
    step.loss = result.loss;

    apply_step(model.image, result.gradient.image, config.learning_rate);
    apply_step(model.text, result.gradient.text, config.learning_rate);
    ++state.step;
    return step;
}

}  // namespace patchmask
