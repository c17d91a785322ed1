// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "patchmask/batch_shaping.hpp"
#include "patchmask/calibration.hpp"
#include "patchmask/cluster_masker.hpp"
#include "patchmask/io.hpp"
#include "patchmask/stats.hpp"
#include "patchmask/synthetic.hpp"
#include "patchmask/toy_contrastive.hpp"

#ifndef PATCHMASK_CLI
#error "PATCHMASK_CLI must point at the patchmask executable"
#endif

using namespace patchmask;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

SimilarityMatrix random_similarity(std::size_t n, Rng& rng) {
    FeatureGrid g{n, 1 + rng.uniform_index(8), {}};
    g.features.resize(g.count * g.dim);
    for (double& v : g.features) v = rng.normal();
    return cosine_matrix(g);
}

std::vector<std::vector<double>> rows_of(const SimilarityMatrix& sim) {
    std::vector<std::vector<double>> rows(sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i) rows[i].assign(sim.row(i).begin(), sim.row(i).end());
    return rows;
}

bool subset(const Mask& inner, const Mask& outer) {
    for (std::size_t i = 0; i < inner.length(); ++i) {
        if (inner.masked[i] && !outer.masked[i]) return false;
    }
    return true;
}

// 1. Calibration to a 0.5 mean ratio on 1,000 smoothed-noise images at L = 196.
Outcome calibration_fidelity() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<SimilarityMatrix> sample;
    sample.reserve(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        const Image img = smoothed_noise_image(224, 224, 3, derive_seed(2024, i));
        sample.push_back(cosine_matrix(pixel_normalize(patchify(img, 16))));
    }
    Rng rng(7);
    const CalibrationReport report = calibrate_threshold(sample, 0.03, 0.5, 0.02, 40, rng);

    // independent re-evaluation: fresh anchors through cluster_mask itself
    Rng fresh(0xfeedULL);
    std::vector<Mask> masks;
    masks.reserve(sample.size());
    for (const auto& sim : sample) masks.push_back(cluster_mask(sim, 0.03, report.found_r, fresh));
    const MaskStats stats = stats_report(masks);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool ok = report.converged && std::abs(stats.mean_ratio - 0.5) <= 0.02 &&
                    std::abs(report.fresh_seed_ratio - 0.5) <= 0.02 && seconds < 60.0;
    return {ok, fmt("r=%.6f re-evaluated mean=%.4f", report.found_r, stats.mean_ratio) +
                    fmt(" frozen=%.4f runtime=%.1fs", report.achieved_ratio, seconds)};
}

// 2. cluster_mask against the brute-force membership oracle.
Outcome oracle_equivalence() {
    Rng gen(1);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + gen.uniform_index(32);
        const auto sim = random_similarity(n, gen);
        const double ratio = 0.01 + 0.45 * gen.uniform01();
        const double r = gen.uniform(-1.05, 1.05);
        Rng rng(gen.next());
        const Mask mask = cluster_mask(sim, ratio, r, rng);
        const auto expected = oracle::cluster_membership(rows_of(sim), mask.anchors, r);
        for (std::size_t j = 0; j < n; ++j) mismatches += static_cast<bool>(mask.masked[j]) != expected[j];
    }
    return {mismatches == 0, fmt("%.0f mismatches over 10000 instances", static_cast<double>(mismatches))};
}

// 3. Inclusion under threshold decrease and anchor addition.
Outcome monotonicity() {
    Rng gen(3);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + gen.uniform_index(63);
        const auto sim = random_similarity(n, gen);
        auto anchors = gen.sample_without_replacement(n, 1 + gen.uniform_index(std::max<std::size_t>(1, n / 4)));
        double lo = gen.uniform(-1.05, 1.05), hi = gen.uniform(-1.05, 1.05);
        if (lo > hi) std::swap(lo, hi);
        violations += !subset(cluster_mask_with_anchors(sim, anchors, hi), cluster_mask_with_anchors(sim, anchors, lo));

        const double r = gen.uniform(-1.0, 1.0);
        const Mask before = cluster_mask_with_anchors(sim, anchors, r);
        const std::size_t extra = gen.uniform_index(n);
        if (std::find(anchors.begin(), anchors.end(), extra) == anchors.end()) anchors.push_back(extra);
        violations += !subset(before, cluster_mask_with_anchors(sim, anchors, r));
    }
    return {violations == 0, fmt("%.0f violations over 1000 instances", static_cast<double>(violations))};
}

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
    std::vector<double> v(dim);
    double n = 0.0;
    for (double& x : v) {
        x = rng.normal();
        n += x * x;
    }
    for (double& x : v) x /= std::sqrt(n);
    return v;
}

// 4. ln N for identical embeddings; naive-oracle agreement for random batches.
Outcome info_nce_identities() {
    Rng rng(4);
    double worst_ln = 0.0;
    for (std::size_t n : {2u, 4u, 8u, 64u}) {
        const auto v = random_unit(16, rng);
        std::vector<EmbeddingPair> pairs(n, EmbeddingPair{v, v});
        const double ln_n = std::log(static_cast<double>(n));
        worst_ln = std::max({worst_ln, std::abs(info_nce_v2l(pairs, kDefaultTemperature) - ln_n),
                             std::abs(info_nce_symmetric(pairs, kDefaultTemperature) - ln_n)});
    }
    double worst_oracle = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(15);
        const std::size_t dim = 2 + rng.uniform_index(15);
        std::vector<EmbeddingPair> pairs(n);
        std::vector<std::vector<double>> images, texts;
        for (auto& p : pairs) {
            p.image = random_unit(dim, rng);
            p.text = random_unit(dim, rng);
            images.push_back(p.image);
            texts.push_back(p.text);
        }
        const double tau = 0.05 + 0.95 * rng.uniform01();
        worst_oracle = std::max(worst_oracle, std::abs(info_nce_symmetric(pairs, tau) -
                                                       oracle::info_nce_symmetric(images, texts, tau)));
    }
    return {worst_ln <= 1e-6 && worst_oracle <= 1e-9,
            fmt("max |loss - ln N| = %.2e, max oracle gap = %.2e", worst_ln, worst_oracle)};
}

struct SmallInstance {
    ToyModel model;
    std::vector<PatchGrid> grids;
    std::vector<std::vector<double>> tokens;
    ShapedBatch shaped;
};

// N = 4 textured images masked by the cluster pipeline, D = 8.
SmallInstance small_instance(Rng& rng) {
    ColorCaptionOptions opts;
    opts.count = 4;
    opts.image_size = 16;
    opts.seed = rng.next();
    const auto data = color_caption_dataset(opts);
    MaskerConfig masker;
    masker.threshold_r = rng.uniform(0.0, 0.9);
    masker.anchor_ratio = 0.1;

    SmallInstance inst;
    std::vector<Mask> masks;
    for (const auto& ex : data) {
        masks.push_back(make_mask(ex.image, 4, masker, rng));
        inst.grids.push_back(patchify(ex.image, 4));
        inst.tokens.push_back(ex.tokens);
    }
    inst.shaped = shape_batch(masks, 0.5, rng);
    inst.model = make_toy_model(inst.grids.front().patch_dim(), opts.palette_size, 8, rng.next());
    return inst;
}

// 5. Analytic gradients against central differences (h = 1e-5).
Outcome gradient_check() {
    Rng rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        SmallInstance inst = small_instance(rng);
        const LossResult analytic =
            contrastive_loss(inst.model, inst.grids, inst.shaped, inst.tokens, kDefaultTemperature);
        auto loss = [&] {
            return contrastive_loss(inst.model, inst.grids, inst.shaped, inst.tokens, kDefaultTemperature).loss;
        };
        auto sweep = [&](std::vector<double>& params, const std::vector<double>& grads) {
            for (std::size_t k = 0; k < params.size(); ++k) {
                const double numeric = oracle::central_difference(loss, params[k], 1e-5);
                const double denom = std::max({std::abs(grads[k]), std::abs(numeric), 1e-6});
                worst = std::max(worst, std::abs(grads[k] - numeric) / denom);
            }
        };
        sweep(inst.model.image.weights, analytic.gradient.image.weights);
        sweep(inst.model.image.bias, analytic.gradient.image.bias);
        sweep(inst.model.text.weights, analytic.gradient.text.weights);
        sweep(inst.model.text.bias, analytic.gradient.text.bias);
    }
    return {worst <= 1e-4, fmt("max relative error %.2e over 20 instances", worst)};
}

// 6. Pixels of patches outside the attended slots cannot move the loss.
Outcome attention_mask_correctness() {
    Rng rng(6);
    int identical = 0;
    for (int trial = 0; trial < 50; ++trial) {
        SmallInstance inst = small_instance(rng);
        const double before = contrastive_loss(inst.model, inst.grids, inst.shaped, inst.tokens, kDefaultTemperature).loss;
        for (std::size_t i = 0; i < inst.grids.size(); ++i) {
            std::vector<bool> attended(inst.shaped.length, false);
            for (std::size_t s = 0; s < inst.shaped.slots; ++s) {
                if (inst.shaped.attention[i][s]) attended[inst.shaped.kept_indices[i][s]] = true;
            }
            for (std::size_t p = 0; p < inst.shaped.length; ++p) {
                if (attended[p]) continue;
                for (double& v : inst.grids[i].patch(p)) v = rng.uniform01();
            }
        }
        const double after = contrastive_loss(inst.model, inst.grids, inst.shaped, inst.tokens, kDefaultTemperature).loss;
        identical += (after == before);
    }
    return {identical == 50, fmt("%.0f of 50 trials bit-identical", identical)};
}

// 7. beta = 0.5, L = 196: 98 slots each, drop/pad counts as specified.
Outcome batch_shaping_contract() {
    Rng rng(7);
    std::vector<Mask> masks;
    for (int i = 0; i < 1000; ++i) {
        Mask m(196);
        for (std::size_t p : rng.sample_without_replacement(196, rng.uniform_index(197))) m.masked[p] = 1;
        masks.push_back(std::move(m));
    }
    Rng shape_rng(8);
    const ShapedBatch shaped = shape_batch(masks, 0.5, shape_rng);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const std::size_t visible = masks[i].visible_count();
        const std::size_t real = shaped.real_count(i);
        const std::size_t padding = shaped.slots - real;
        const std::size_t dropped = visible - real;
        bool ok = shaped.kept_indices[i].size() == 98 && shaped.attention[i].size() == 98;
        ok = ok && dropped == (visible > 98 ? visible - 98 : 0) && padding == (visible < 98 ? 98 - visible : 0);
        for (std::size_t s = 0; s < shaped.slots && ok; ++s) {
            const std::size_t idx = shaped.kept_indices[i][s];
            ok = shaped.attention[i][s] ? (idx < 196 && masks[i].masked[idx] == 0) : idx == shaped.padding_index();
        }
        bad += !ok;
    }
    return {shaped.slots == 98 && bad == 0,
            fmt("slots=%.0f, %.0f of 1000 masks violate the contract", static_cast<double>(shaped.slots),
                static_cast<double>(bad))};
}

// 8. K-Means masking: 6 of 12 clusters, nearest-centroid optimal assignments.
Outcome kmeans_variant() {
    Rng rng(8);
    std::size_t bad = 0;
    double worst_gap = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Image img = smoothed_noise_image(224, 224, 3, derive_seed(88, trial));
        const PatchGrid grid = pixel_normalize(patchify(img, 16));
        KMeansResult details;
        std::vector<std::size_t> chosen;
        const Mask mask = kmeans_mask(grid, 12, 10, 0.5, rng, &details, &chosen);
        bool ok = details.k == 12 && chosen.size() == 6 && details.iterations <= 10;
        const auto values = grid.values();
        for (std::size_t i = 0; i < grid.count(); ++i) {
            const double* point = &values[i * grid.patch_dim()];
            const double own = oracle::squared_distance(point, &details.centroids[details.assignment[i] * grid.patch_dim()],
                                                        grid.patch_dim());
            const double best = oracle::nearest_squared_distance(point, details.centroids, details.k, grid.patch_dim());
            worst_gap = std::max(worst_gap, own - best);
            const bool in_chosen = std::find(chosen.begin(), chosen.end(), details.assignment[i]) != chosen.end();
            ok = ok && static_cast<bool>(mask.masked[i]) == in_chosen;
        }
        bad += !ok;
    }
    return {bad == 0 && worst_gap <= 1e-9,
            fmt("%.0f of 200 instances wrong, max assignment gap %.2e", static_cast<double>(bad), worst_gap)};
}

// 9. Affine invariance and cosine == Pearson after pixel normalization.
Outcome pixel_normalization() {
    Rng rng(9);
    double worst_affine = 0.0, worst_pearson = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = 768;
        PatchGrid grid(1, 3, 16, 3);
        std::vector<double> p(dim), q(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            p[k] = rng.uniform01();
            q[k] = rng.uniform01();
        }
        const double a = 0.01 + 10.0 * rng.uniform01();
        const double b = rng.uniform(-5.0, 5.0);
        for (std::size_t k = 0; k < dim; ++k) {
            grid.patch(0)[k] = p[k];
            grid.patch(1)[k] = a * p[k] + b;
            grid.patch(2)[k] = q[k];
        }
        const PatchGrid norm = pixel_normalize(grid);
        for (std::size_t k = 0; k < dim; ++k) worst_affine = std::max(worst_affine, std::abs(norm.patch(0)[k] - norm.patch(1)[k]));
        const SimilarityMatrix sim = cosine_matrix(norm);
        worst_pearson = std::max(worst_pearson, std::abs(sim(0, 2) - oracle::pearson(p, q)));
    }
    return {worst_affine <= 1e-6 && worst_pearson <= 1e-6,
            fmt("max affine gap %.2e, max |cos - pearson| %.2e", worst_affine, worst_pearson)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string cmd = std::string(PATCHMASK_CLI) + " " + args + " > " + stdout_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// 10. Identical seeds give byte-identical CLI artifacts.
Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "patchmask_acceptance";
    fs::remove_all(root);
    fs::create_directories(root / "images");
    for (int i = 0; i < 8; ++i) {
        save_image(root / "images" / ("img" + std::to_string(i) + ".ppm"), smoothed_noise_image(64, 64, 3, 500 + i));
    }
    const std::string images = (root / "images").string();
    const fs::path cfg = root / "train.json";
    std::ofstream(cfg) << R"({"strategy": "cluster-rgb", "threshold_r": 0.5, "seed": 3, "steps_per_epoch": 4})";

    std::string failures;
    for (const char* run : {"a", "b"}) {
        const fs::path out = root / run;
        if (run_cli("mask --in " + images + " --out " + (out / "mask").string() +
                    " --strategy cluster-rgb --anchor-ratio 0.03 --threshold 0.6 --beta 0.5 --seed 11 --patch-size 8"
                    " --render") != 0) {
            failures += " mask";
        }
        if (run_cli("mask --in " + images + " --out " + (out / "kmeans").string() +
                    " --strategy kmeans --kmeans-k 6 --seed 11 --patch-size 8") != 0) {
            failures += " kmeans";
        }
        if (run_cli("calibrate --in " + images + " --target 0.5 --anchor-ratio 0.03 --tolerance 0.1 --seed 11"
                    " --patch-size 8 --calibration-out " + (out / "report.json").string()) != 0) {
            failures += " calibrate";
        }
        if (run_cli("train --config " + cfg.string() + " --epochs 3 --out " + (out / "train").string()) != 0) {
            failures += " train";
        }
        if (run_cli("stats --in " + (out / "mask" / "masks.txt").string() + " --json",
                    (out / "stats.json").string()) != 0) {
            failures += " stats";
        }
    }

    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
        ++compared;
        if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++differing;
    }
    const bool ok = failures.empty() && compared >= 12 && differing == 0;
    std::string detail = fmt("%.0f files compared, %.0f differ", static_cast<double>(compared), static_cast<double>(differing));
    if (!failures.empty()) detail += "; failed commands:" + failures;
    return {ok, detail};
}

// 11. 200 full-batch steps cut the symmetric loss to <= 0.8x its initial value.
Outcome training_smoke() {
    ColorCaptionOptions opts;
    opts.count = 16;
    opts.seed = 11;
    const auto data = color_caption_dataset(opts);
    std::string detail;
    bool ok = true;
    for (Strategy strategy : {Strategy::ClusterRGB, Strategy::Random}) {
        TrainConfig cfg;
        cfg.masker.strategy = strategy;
        cfg.masker.threshold_r = 0.5;
        cfg.masker.seed = 1;
        ToyModel model = make_toy_model(8 * 8 * 3, opts.palette_size, 16, 2);
        TrainState state;
        state.epoch_total = 20;
        double initial = 0.0, final_loss = 0.0;
        for (std::size_t epoch = 0; epoch < 20; ++epoch) {
            state.epoch_current = epoch;
            for (int s = 0; s < 10; ++s) {
                const StepResult r = train_step(model, data, cfg, state);
                if (state.step == 1) initial = r.loss;
                final_loss = r.loss;
            }
        }
        ok = ok && state.step == 200 && final_loss <= 0.8 * initial;
        detail += std::string(to_string(strategy)) + fmt(" %.3f -> %.3f (%.2fx) ", initial, final_loss, final_loss / initial);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 calibration fidelity", calibration_fidelity},
        {"2 oracle equivalence", oracle_equivalence},
        {"3 monotonicity", monotonicity},
        {"4 InfoNCE identities", info_nce_identities},
        {"5 gradient check", gradient_check},
        {"6 attention-mask correctness", attention_mask_correctness},
        {"7 batch-shaping contract", batch_shaping_contract},
        {"8 K-Means variant", kmeans_variant},
        {"9 pixel-normalization properties", pixel_normalization},
        {"10 determinism", cli_determinism},
        {"11 training smoke test", training_smoke},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
        std::fflush(stdout);
        failed += !outcome.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
