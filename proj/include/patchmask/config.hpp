#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "patchmask/calibration.hpp"
#include "patchmask/cluster_masker.hpp"
#include "patchmask/stats.hpp"

namespace patchmask {

enum class Command { Mask, Calibrate, Train, Stats };

// Everything a CLI invocation needs. JSON config files use these field names;
// command-line flags override file values.
struct RunConfig {
    Command command = Command::Mask;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path output;
    MaskerConfig masker;
    double beta = 0.5;
    bool shape = false;  // write a shaped-batch dump next to the masks
    bool render = false;
    std::uint64_t seed = 0;
    std::size_t patch_size = 16;
    double alpha = 1.0;  // RGB weight for cluster-embedding masking
    bool dump_similarity = false;

    // calibrate
    double target_ratio = 0.5;
    double tolerance = kDefaultCalibrationTolerance;
    std::size_t max_iters = kDefaultCalibrationIters;
    std::size_t sample_size = kDefaultCalibrationSample;
    std::filesystem::path calibration_out;

    // train
    std::size_t epochs = 20;
    std::size_t steps_per_epoch = 10;
    double learning_rate = 0.5;
    double temperature = 0.07;
    double alpha_exponent = 1.0;
    std::size_t dataset_size = 16;
    std::size_t image_size = 32;
    std::size_t train_patch_size = 8;
    std::size_t model_dim = 16;

    bool json_output = false;  // stats
};

// Overlays the fields present in `j` onto `config`. Throws ConfigError on
// unknown keys or wrong types.
void apply_json(RunConfig& config, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const CalibrationReport& report);
nlohmann::json to_json(const MaskStats& stats);

}  // namespace patchmask
