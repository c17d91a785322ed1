#include "patchmask/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "patchmask/batch_shaping.hpp"
#include "patchmask/calibration.hpp"
#include "patchmask/error.hpp"
#include "patchmask/io.hpp"
#include "patchmask/stats.hpp"
#include "patchmask/synthetic.hpp"
#include "patchmask/toy_contrastive.hpp"

namespace patchmask {
namespace {

constexpr std::uint64_t kShapeStream = 0x62657461ULL;
constexpr std::uint64_t kDatasetStream = 0x64617461ULL;
constexpr std::uint64_t kModelStream = 0x6d6f646cULL;

std::filesystem::path single_input(const RunConfig& config) {
    if (config.inputs.size() != 1) throw ConfigError("exactly one --in path is required");
    return config.inputs.front();
}

void ensure_output_dir(const std::filesystem::path& dir) {
    if (dir.empty()) throw ConfigError("an --out directory is required");
    std::filesystem::create_directories(dir);
}

MaskerConfig masker_for(const RunConfig& config) {
    MaskerConfig masker = config.masker;
    masker.seed = config.seed;
    masker.validate();
    return masker;
}

// Similarity the cluster strategies threshold for one image.
SimilarityMatrix similarity_for(const Image& image, const RunConfig& config, const MaskerConfig& masker) {
    return masking_similarity(pixel_normalize(patchify(image, config.patch_size)), masker, config.alpha);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

int exit_code_for(const std::exception& error) {
    if (const auto* e = dynamic_cast<const Error*>(&error)) {
        switch (e->kind()) {
            case ErrorKind::Config: return kExitConfig;
            case ErrorKind::Data: return kExitData;
            case ErrorKind::Convergence: return kExitConvergence;
        }
    }
    if (dynamic_cast<const std::invalid_argument*>(&error) || dynamic_cast<const std::out_of_range*>(&error)) {
        return kExitConfig;
    }
    return kExitData;
}

void run_mask(const RunConfig& config, std::ostream& out) {
    const MaskerConfig masker = masker_for(config);
    const auto files = list_images(single_input(config));
    if (files.empty()) throw ConfigError("no .ppm/.pgm images in " + single_input(config).string());
    ensure_output_dir(config.output);

    std::vector<Mask> masks;
    masks.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        const Image image = load_image(files[i]);
        Rng rng(derive_seed(masker.seed, i));
        if (config.dump_similarity && masker.strategy != Strategy::Random && masker.strategy != Strategy::KMeans) {
            std::ofstream tsv(config.output / (files[i].stem().string() + "_sim.tsv"));
            write_tsv(tsv, similarity_for(image, config, masker));
        }
        masks.push_back(make_mask(image, config.patch_size, masker, rng, config.alpha));
        if (config.render) {
            const char* ext = image.channels == 3 ? "_mask.ppm" : "_mask.pgm";
            save_image(config.output / (files[i].stem().string() + ext), render_mask(image, masks.back(), config.patch_size));
        }
    }
    write_masks(config.output / "masks.txt", masks);

    Rng shape_rng(derive_seed(masker.seed, kShapeStream));
    const ShapedBatch shaped = shape_batch(masks, config.beta, shape_rng);
    {
        std::ofstream dump(config.output / "shaped.txt");
        write_shaped_batch(dump, shaped);
    }

    const MaskStats stats = stats_report(masks);
    out << "masked " << masks.size() << " images with " << to_string(masker.strategy) << "; mean ratio "
        << format_double(stats.mean_ratio) << "; " << shaped.slots << " visible slots per image\n";
}

int run_calibrate(const RunConfig& config, std::ostream& out) {
    const MaskerConfig masker = masker_for(config);
    if (masker.strategy != Strategy::ClusterRGB && masker.strategy != Strategy::ClusterEmbedding) {
        throw ConfigError("calibration applies to the cluster strategies only");
    }
    const auto files = list_images(single_input(config));
    if (files.empty()) throw ConfigError("no .ppm/.pgm images in " + single_input(config).string());
    if (config.sample_size == 0) throw ConfigError("sample_size must be positive");

    const std::size_t count = std::min(config.sample_size, files.size());
    std::vector<SimilarityMatrix> sample;
    sample.reserve(count);
    for (std::size_t i = 0; i < count; ++i) sample.push_back(similarity_for(load_image(files[i]), config, masker));

    Rng rng(masker.seed);
    const CalibrationReport report = calibrate_threshold(sample, masker.anchor_ratio, config.target_ratio,
                                                         config.tolerance, config.max_iters, rng);
    if (!config.calibration_out.empty()) {
        if (config.calibration_out.has_parent_path()) std::filesystem::create_directories(config.calibration_out.parent_path());
        std::ofstream json(config.calibration_out);
        if (!json) throw std::runtime_error("cannot write " + config.calibration_out.string());
        json << to_json(report).dump(2) << '\n';
    }
    out << "threshold r = " << format_double(report.found_r) << " gives mean ratio " << format_double(report.achieved_ratio)
        << " (fresh anchors: " << format_double(report.fresh_seed_ratio) << ") over " << report.sample_size
        << " images after " << report.iterations << " bisection steps\n";
    if (!report.converged) {
        out << "calibration did not reach the target within tolerance " << format_double(config.tolerance) << '\n';
        return kExitConvergence;
    }
    return kExitOk;
}

void run_train(const RunConfig& config, std::ostream& out) {
    if (config.epochs == 0 || config.steps_per_epoch == 0) throw ConfigError("epochs and steps_per_epoch must be positive");
    if (config.dataset_size < 2) throw ConfigError("dataset_size must be at least 2");
    ensure_output_dir(config.output);

    ColorCaptionOptions data_options;
    data_options.count = config.dataset_size;
    data_options.image_size = config.image_size;
    data_options.seed = derive_seed(config.seed, kDatasetStream);
    const auto dataset = color_caption_dataset(data_options);

    TrainConfig train;
    train.masker = masker_for(config);
    train.patch_size = config.train_patch_size;
    train.beta = config.beta;
    train.learning_rate = config.learning_rate;

    const std::size_t patch_dim = config.train_patch_size * config.train_patch_size * 3;
    ToyModel model = make_toy_model(patch_dim, dataset.front().tokens.size(), config.model_dim,
                                    derive_seed(config.seed, kModelStream));

    TrainState state;
    state.epoch_total = config.epochs;
    state.alpha_exponent = config.alpha_exponent;
    state.temperature = config.temperature;

    std::ofstream log(config.output / "train_log.csv");
    if (!log) throw std::runtime_error("cannot write training log");
    log << "step,loss,alpha,mean_mask_ratio\n";
    StepResult first, last;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        state.epoch_current = epoch;
        for (std::size_t s = 0; s < config.steps_per_epoch; ++s) {
            const std::size_t step_index = state.step;
            last = train_step(model, dataset, train, state);
            if (step_index == 0) first = last;
            log << step_index << ',' << format_double(last.loss) << ',' << format_double(last.alpha) << ','
                << format_double(last.mean_mask_ratio) << '\n';
        }
    }
    out << "trained " << state.step << " steps; loss " << format_double(first.loss) << " -> "
        << format_double(last.loss) << '\n';
}

void run_stats(const RunConfig& config, std::ostream& out) {
    const auto masks = read_masks(single_input(config));
    if (masks.empty()) throw ConfigError("mask file holds no masks");
    const MaskStats stats = stats_report(masks);
    if (config.json_output) {
        out << to_json(stats).dump(2) << '\n';
    } else {
        write_stats_text(out, stats);
    }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        switch (config.command) {
            case Command::Mask: run_mask(config, out); return kExitOk;
            case Command::Calibrate: return run_calibrate(config, out);
            case Command::Train: run_train(config, out); return kExitOk;
            case Command::Stats: run_stats(config, out); return kExitOk;
        }
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace patchmask
