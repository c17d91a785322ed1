#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace patchmask {

// Seeded generator with platform-independent sampling. The standard
// distributions are implementation-defined, so bounded integers, uniform
// reals and normals are derived here from the raw mt19937_64 stream.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    // Uniform real in [0, 1) with 53 random bits.
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller.
    double normal();

    // k distinct indices drawn uniformly from [0, n), returned sorted ascending.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Mixes a base seed with a stream index (splitmix64 finalizer) so that each
// image, step or evaluation pass gets an independent, reproducible generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace patchmask
