#pragma once

#include <cstdint>

namespace andlab {

// SplitMix64 (Steele, Lea, Flood 2014; public domain reference constants).
// Chosen because every step is a pure function of the 64-bit state, so trial
// streams can be derived by mixing (master seed, trial index) and are
// reproducible bit-for-bit on any platform.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derived seed for trial i of a run. This formula is part of the on-disk
// contract: records store it next to the trial id so results can be recomputed
// by any implementation.
//   derived = mix64(master ^ (0x9E3779B97F4A7C15 * (i + 1)))
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_index) {
    return mix64(master ^ (0x9E3779B97F4A7C15ULL * (trial_index + 1)));
}

// Independent sub-stream master for experiments that run one ensemble per
// scale index. Also part of the on-disk contract:
//   stream = mix64(master ^ (0xD1B54A32D192ED03 * (tag + 1)))
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(master ^ (0xD1B54A32D192ED03ULL * (tag + 1)));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1): top 53 bits scaled by 2^-53.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * next_unit(); }

private:
    std::uint64_t state_;
};

}  // namespace andlab
