#pragma once

#include <cstdint>
#include <random>

namespace orbitshift {

// Seeded RNG for randomized verification corpora.  All draws go through the
// raw 64-bit engine output; std::*_distribution is avoided because its
// sequences are not specified portably.
class rng64 {
public:
    explicit rng64(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace orbitshift
