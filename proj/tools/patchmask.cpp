#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "patchmask/commands.hpp"
#include "patchmask/error.hpp"

using patchmask::RunConfig;

namespace {

// Flags are parsed into a scratch config; only the flags the user actually
// passed are copied over the (optional) JSON config file.
class Overrides {
public:
    template <typename T>
    CLI::Option* add(CLI::App& app, const std::string& name, T RunConfig::*field, const std::string& help) {
        CLI::Option* opt = app.add_option(name, flags_.*field, help);
        bindings_.push_back({opt, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; }});
        return opt;
    }

    template <typename T>
    CLI::Option* add_masker(CLI::App& app, const std::string& name, T patchmask::MaskerConfig::*field,
                            const std::string& help) {
        CLI::Option* opt = app.add_option(name, flags_.masker.*field, help);
        bindings_.push_back(
            {opt, [field](RunConfig& dst, const RunConfig& src) { dst.masker.*field = src.masker.*field; }});
        return opt;
    }

    CLI::Option* add_flag(CLI::App& app, const std::string& name, bool RunConfig::*field, const std::string& help) {
        CLI::Option* opt = app.add_flag(name, flags_.*field, help);
        bindings_.push_back({opt, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; }});
        return opt;
    }

    RunConfig& scratch() { return flags_; }

    void apply(RunConfig& config) const {
        for (const auto& b : bindings_) {
            if (b.option->count() > 0) b.copy(config, flags_);
        }
    }

private:
    struct Binding {
        CLI::Option* option;
        std::function<void(RunConfig&, const RunConfig&)> copy;
    };
    RunConfig flags_;
    std::vector<Binding> bindings_;
};

void add_masker_options(CLI::App& app, Overrides& o, std::string& strategy) {
    app.add_option("--strategy", strategy, "cluster-rgb | cluster-embedding | kmeans | random");
    o.add_masker(app, "--anchor-ratio", &patchmask::MaskerConfig::anchor_ratio, "fraction of patches used as anchors");
    o.add_masker(app, "--kmeans-k", &patchmask::MaskerConfig::kmeans_k, "clusters for the k-means strategy");
    o.add_masker(app, "--kmeans-iters", &patchmask::MaskerConfig::kmeans_max_iters, "maximum Lloyd iterations");
    o.add_masker(app, "--kmeans-fraction", &patchmask::MaskerConfig::kmeans_mask_fraction,
                 "fraction of k-means clusters to mask");
    o.add_masker(app, "--random-ratio", &patchmask::MaskerConfig::random_mask_ratio, "ratio for random masking");
    o.add_masker(app, "--embed-dim", &patchmask::MaskerConfig::embed_dim, "width of the patch-embedding stand-in");
    o.add(app, "--seed", &RunConfig::seed, "RNG seed");
    o.add(app, "--patch-size", &RunConfig::patch_size, "patch side length in pixels");
    o.add(app, "--alpha", &RunConfig::alpha, "RGB weight of the blended similarity");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-based patch masking for contrastive vision-language pre-training"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    std::string strategy;
    std::vector<std::string> inputs;
    std::string output;
    std::string calibration_out;

    auto add_common = [&](CLI::App& sub) {
        sub.add_option("--config", config_path, "JSON config; flags override its values");
        sub.add_option("--in", inputs, "input directory or file");
        sub.add_option("--out", output, "output directory");
    };

    CLI::App* mask = app.add_subcommand("mask", "mask every image in a directory");
    add_common(*mask);
    add_masker_options(*mask, o, strategy);
    o.add_masker(*mask, "--threshold", &patchmask::MaskerConfig::threshold_r, "similarity threshold r");
    o.add(*mask, "--beta", &RunConfig::beta, "minimum mask ratio for batch shaping");
    o.add_flag(*mask, "--render", &RunConfig::render, "write mask overlays");
    o.add_flag(*mask, "--dump-similarity", &RunConfig::dump_similarity, "write similarity matrices as TSV");

    CLI::App* calibrate = app.add_subcommand("calibrate", "search the threshold for a target mean mask ratio");
    add_common(*calibrate);
    add_masker_options(*calibrate, o, strategy);
    o.add(*calibrate, "--target", &RunConfig::target_ratio, "target mean mask ratio");
    o.add(*calibrate, "--tolerance", &RunConfig::tolerance, "accepted absolute deviation from the target");
    o.add(*calibrate, "--max-iters", &RunConfig::max_iters, "maximum bisection steps");
    o.add(*calibrate, "--sample-size", &RunConfig::sample_size, "images used for calibration");
    calibrate->add_option("--calibration-out", calibration_out, "write the report as JSON");

    CLI::App* train = app.add_subcommand("train", "toy contrastive training on synthetic color captions");
    add_common(*train);
    add_masker_options(*train, o, strategy);
    o.add_masker(*train, "--threshold", &patchmask::MaskerConfig::threshold_r, "similarity threshold r");
    o.add(*train, "--beta", &RunConfig::beta, "minimum mask ratio for batch shaping");
    o.add(*train, "--epochs", &RunConfig::epochs, "training epochs");
    o.add(*train, "--steps-per-epoch", &RunConfig::steps_per_epoch, "full-batch steps per epoch");
    o.add(*train, "--lr", &RunConfig::learning_rate, "learning rate");
    o.add(*train, "--temperature", &RunConfig::temperature, "InfoNCE temperature");
    o.add(*train, "--alpha-exponent", &RunConfig::alpha_exponent, "exponent k of the blend schedule");

    CLI::App* stats = app.add_subcommand("stats", "summarize a mask file");
    add_common(*stats);
    o.add_flag(*stats, "--json", &RunConfig::json_output, "print JSON instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : patchmask::kExitConfig;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : patchmask::load_run_config(config_path);
        o.apply(config);
        if (!strategy.empty()) config.masker.strategy = patchmask::parse_strategy(strategy);
        if (!inputs.empty()) config.inputs.assign(inputs.begin(), inputs.end());
        if (!output.empty()) config.output = output;
        if (!calibration_out.empty()) config.calibration_out = calibration_out;

        if (mask->parsed()) config.command = patchmask::Command::Mask;
        if (calibrate->parsed()) config.command = patchmask::Command::Calibrate;
        if (train->parsed()) config.command = patchmask::Command::Train;
        if (stats->parsed()) config.command = patchmask::Command::Stats;

        return patchmask::run(config, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return patchmask::exit_code_for(e);
    }
}
