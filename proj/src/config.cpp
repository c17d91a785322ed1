#include "patchmask/config.hpp"

#include <fstream>

#include "patchmask/error.hpp"

namespace patchmask {
namespace {

Command parse_command(const std::string& name) {
    if (name == "mask") return Command::Mask;
    if (name == "calibrate") return Command::Calibrate;
    if (name == "train") return Command::Train;
    if (name == "stats") return Command::Stats;
    throw ConfigError("unknown command '" + name + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

void apply_json(RunConfig& config, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const char* k = key.c_str();
        if (key == "command") {
            std::string name;
            read(j, k, name);
            config.command = parse_command(name);
        } else if (key == "inputs") {
            std::vector<std::string> paths;
            read(j, k, paths);
            config.inputs.assign(paths.begin(), paths.end());
        } else if (key == "output") {
            std::string path;
            read(j, k, path);
            config.output = path;
        } else if (key == "strategy") {
            std::string name;
            read(j, k, name);
            config.masker.strategy = parse_strategy(name);
        } else if (key == "anchor_ratio") {
            read(j, k, config.masker.anchor_ratio);
        } else if (key == "threshold_r") {
            read(j, k, config.masker.threshold_r);
        } else if (key == "kmeans_k") {
            read(j, k, config.masker.kmeans_k);
        } else if (key == "kmeans_max_iters") {
            read(j, k, config.masker.kmeans_max_iters);
        } else if (key == "kmeans_mask_fraction") {
            read(j, k, config.masker.kmeans_mask_fraction);
        } else if (key == "random_mask_ratio") {
            read(j, k, config.masker.random_mask_ratio);
        } else if (key == "embed_dim") {
            read(j, k, config.masker.embed_dim);
        } else if (key == "beta") {
            read(j, k, config.beta);
        } else if (key == "render") {
            read(j, k, config.render);
        } else if (key == "seed") {
            read(j, k, config.seed);
        } else if (key == "patch_size") {
            read(j, k, config.patch_size);
        } else if (key == "alpha") {
            read(j, k, config.alpha);
        } else if (key == "dump_similarity") {
            read(j, k, config.dump_similarity);
        } else if (key == "target_ratio") {
            read(j, k, config.target_ratio);
        } else if (key == "tolerance") {
            read(j, k, config.tolerance);
        } else if (key == "max_iters") {
            read(j, k, config.max_iters);
        } else if (key == "sample_size") {
            read(j, k, config.sample_size);
        } else if (key == "calibration_out") {
            std::string path;
            read(j, k, path);
            config.calibration_out = path;
        } else if (key == "epochs") {
            read(j, k, config.epochs);
        } else if (key == "steps_per_epoch") {
            read(j, k, config.steps_per_epoch);
        } else if (key == "learning_rate") {
            read(j, k, config.learning_rate);
        } else if (key == "temperature") {
            read(j, k, config.temperature);
        } else if (key == "alpha_exponent") {
            read(j, k, config.alpha_exponent);
        } else if (key == "dataset_size") {
            read(j, k, config.dataset_size);
        } else if (key == "image_size") {
            read(j, k, config.image_size);
        } else if (key == "train_patch_size") {
            read(j, k, config.train_patch_size);
        } else if (key == "model_dim") {
            read(j, k, config.model_dim);
        } else if (key == "json_output") {
            read(j, k, config.json_output);
        } else {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    RunConfig config;
    apply_json(config, j);
    return config;
}

nlohmann::json to_json(const CalibrationReport& report) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [r, ratio] : report.trace) trace.push_back({r, ratio});
    return {
        {"target_ratio", report.target_ratio},
        {"found_r", report.found_r},
        {"achieved_ratio", report.achieved_ratio},
        {"iterations", report.iterations},
        {"trace", trace},
        {"sample_size", report.sample_size},
        {"converged", report.converged},
        {"fresh_seed_ratio", report.fresh_seed_ratio},
    };
}

nlohmann::json to_json(const MaskStats& stats) {
    return {
        {"count", stats.count},
        {"mean_ratio", stats.mean_ratio},
        {"min_ratio", stats.min_ratio},
        {"max_ratio", stats.max_ratio},
        {"histogram", stats.histogram},
        {"mean_cluster_count", stats.mean_cluster_count},
    };
}

}  // namespace patchmask
