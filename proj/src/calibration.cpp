#include "patchmask/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "patchmask/cluster_masker.hpp"
#include "patchmask/error.hpp"

namespace patchmask {
namespace {

constexpr double kBracketWidth = 1e-6;

}  // namespace

ThresholdObjective::ThresholdObjective(std::span<const SimilarityMatrix> sample, double anchor_ratio,
                                       std::uint64_t anchor_seed) {
    anchors_.reserve(sample.size());
    coverage_.reserve(sample.size());
    lengths_.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const SimilarityMatrix& sim = sample[i];
        const std::size_t length = sim.size();
        if (length == 0) throw std::invalid_argument("calibration: empty similarity matrix in sample");

        Rng rng(derive_seed(anchor_seed, i));
        auto anchors = rng.sample_without_replacement(length, anchor_count(length, anchor_ratio));

        std::vector<double> best(length, -std::numeric_limits<double>::infinity());
        for (std::size_t a : anchors) {
            const auto row = sim.row(a);
            for (std::size_t j = 0; j < length; ++j) best[j] = std::max(best[j], row[j]);
        }
        for (std::size_t a : anchors) best[a] = std::numeric_limits<double>::infinity();
        std::sort(best.begin(), best.end());

        anchors_.push_back(std::move(anchors));
        coverage_.push_back(std::move(best));
        lengths_.push_back(length);
    }
}

double ThresholdObjective::operator()(double r) const {
    double total = 0.0;
    for (std::size_t i = 0; i < coverage_.size(); ++i) {
        const auto& cov = coverage_[i];
        const auto masked = static_cast<std::size_t>(cov.end() - std::lower_bound(cov.begin(), cov.end(), r));
        total += static_cast<double>(masked) / static_cast<double>(lengths_[i]);
    }
    return total / static_cast<double>(coverage_.size());
}

double mean_mask_ratio(std::span<const SimilarityMatrix> sample, double anchor_ratio, double r,
                       std::uint64_t anchor_seed) {
    if (sample.empty()) throw std::invalid_argument("mean_mask_ratio: empty sample");
    double total = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        Rng rng(derive_seed(anchor_seed, i));
        total += mask_ratio(cluster_mask(sample[i], anchor_ratio, r, rng));
    }
    return total / static_cast<double>(sample.size());
}

CalibrationReport calibrate_threshold(std::span<const SimilarityMatrix> sample, double anchor_ratio,
                                      double target_ratio, double tolerance, std::size_t max_iters, Rng& rng) {
    if (sample.empty()) throw ConfigError("calibration: sample is empty");
    if (!(anchor_ratio > 0.0 && anchor_ratio < 1.0)) throw ConfigError("calibration: anchor_ratio must lie in (0, 1)");
    if (!(target_ratio > anchor_ratio && target_ratio < 1.0)) {
        throw ConfigError("calibration: target ratio must lie in (anchor_ratio, 1)");
    }
    if (!(tolerance > 0.0)) throw ConfigError("calibration: tolerance must be positive");

    const std::uint64_t anchor_seed = rng.next();
    const std::uint64_t fresh_seed = rng.next();
    const ThresholdObjective objective(sample, anchor_ratio, anchor_seed);

    CalibrationReport report;
    report.target_ratio = target_ratio;
    report.sample_size = sample.size();

    double lo = kThresholdLow;
    double hi = kThresholdHigh;
    const double at_lo = objective(lo);
    const double at_hi = objective(hi);
    report.trace.emplace_back(lo, at_lo);
    report.trace.emplace_back(hi, at_hi);
    if (target_ratio < at_hi) {
        throw UnreachableTarget("calibration: target ratio " + std::to_string(target_ratio) +
                                " is below the anchors-only ratio " + std::to_string(at_hi));
    }

    while (report.iterations < max_iters && hi - lo > kBracketWidth) {
        const double mid = 0.5 * (lo + hi);
        const double value = objective(mid);
        report.trace.emplace_back(mid, value);
        ++report.iterations;
        // objective is non-increasing in r
        if (value > target_ratio) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    report.found_r = 0.5 * (lo + hi);
    report.achieved_ratio = objective(report.found_r);
    report.trace.emplace_back(report.found_r, report.achieved_ratio);
    report.converged = std::abs(report.achieved_ratio - target_ratio) <= tolerance;
    report.fresh_seed_ratio = mean_mask_ratio(sample, anchor_ratio, report.found_r, fresh_seed);
    return report;
}

}  // namespace patchmask
