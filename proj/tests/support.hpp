#pragma once

// Shared test configuration: one global seed for every randomized check.

#include <random>

namespace testcfg {

inline constexpr unsigned kSeed = 20260811u;

inline std::mt19937& rng() {
    static std::mt19937 gen(kSeed);
    return gen;
}

inline double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng());
}

}  // namespace testcfg
