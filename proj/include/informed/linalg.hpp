#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace informed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// SplitMix64. Used wherever per-run seeds are derived from a base seed plus
// indices, so that runs are reproducible independently of execution order.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix_seed(seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

}  // namespace informed
