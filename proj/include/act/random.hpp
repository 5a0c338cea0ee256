#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "act/belief.hpp"

namespace act {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Draw an index from (index, weight) entries whose weights sum to ~1.
inline std::size_t sample_entries(std::span<const Entry> entries, Rng& rng) {
    if (entries.empty()) throw Error("sample: empty support");
    double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& e : entries) {
        acc += e.value;
        if (u < acc) return e.index;
    }
    return entries.back().index;
}

inline std::size_t sample(const Categorical& p, Rng& rng) { return sample_entries(p.support(), rng); }

}  // namespace act
