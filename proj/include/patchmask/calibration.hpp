#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "patchmask/rng.hpp"
#include "patchmask/similarity.hpp"

namespace patchmask {

inline constexpr double kThresholdLow = -1.0;
inline constexpr double kThresholdHigh = 1.05;  // past the cosine maximum so anchors-only is reachable
inline constexpr double kDefaultCalibrationTolerance = 0.02;
inline constexpr std::size_t kDefaultCalibrationIters = 40;
inline constexpr std::size_t kDefaultCalibrationSample = 1024;

struct CalibrationReport {
    double target_ratio = 0.0;
    double found_r = 0.0;
    double achieved_ratio = 0.0;  // objective at found_r with the frozen anchors
    std::size_t iterations = 0;
    std::vector<std::pair<double, double>> trace;  // (r, mean ratio) per evaluation
    std::size_t sample_size = 0;
    bool converged = false;
    double fresh_seed_ratio = 0.0;  // mean ratio at found_r with freshly drawn anchors
};

// Mean mask ratio over a sample as a function of r, with the anchors of each
// image fixed. For each patch only the best similarity to any anchor matters,
// so every evaluation is a count over a sorted vector.
class ThresholdObjective {
public:
    ThresholdObjective(std::span<const SimilarityMatrix> sample, double anchor_ratio, std::uint64_t anchor_seed);

    double operator()(double r) const;

    std::size_t sample_size() const { return coverage_.size(); }
    const std::vector<std::size_t>& anchors(std::size_t image) const { return anchors_[image]; }

private:
    std::vector<std::vector<std::size_t>> anchors_;
    std::vector<std::vector<double>> coverage_;  // ascending; anchors hold +inf
    std::vector<std::size_t> lengths_;
};

// Mean cluster_mask ratio at r, with anchors drawn from per-image sub-seeds of
// `anchor_seed`.
double mean_mask_ratio(std::span<const SimilarityMatrix> sample, double anchor_ratio, double r,
                       std::uint64_t anchor_seed);

// Bisection on r over [kThresholdLow, kThresholdHigh] until the bracket is
// narrower than 1e-6 or max_iters evaluations are spent. Throws
// UnreachableTarget when the target is below the anchors-only ratio and
// ConfigError on invalid arguments.
CalibrationReport calibrate_threshold(std::span<const SimilarityMatrix> sample, double anchor_ratio,
                                      double target_ratio, double tolerance, std::size_t max_iters, Rng& rng);

}  // namespace patchmask
