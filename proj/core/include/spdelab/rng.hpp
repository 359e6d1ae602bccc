#pragma once

// Deterministic Gaussian streams for the Monte Carlo runs. A stream is
// derived from (seed, stream index) alone, so ensembles can be integrated in
// any order and on any number of threads with identical output. The raw
// generator is SplitMix64 on a per-stream state; normals come from the
// classic Box-Muller pair, which consumes exactly two raw draws per pair
// with no rejection, keeping replay counts deterministic.

#include <cmath>
#include <cstdint>

#include "spdelab/trig.hpp"

namespace spdelab {

class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(mix(seed) ^ mix(stream ^ 0x6a09e667f3bcc909ull))) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1], bounded away from zero so the Box-Muller log is finite
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * kPi * uniform();
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace spdelab
