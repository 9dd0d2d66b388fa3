#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sarx {

// All randomness in the library flows from one base seed. Named sub-streams
// (simulation, init, column sampling, ...) get their own engine so that
// changing how many draws one consumer makes never perturbs the others.

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Seed for the sub-stream `name` of `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view name) {
    return detail::splitmix64(base ^ detail::fnv1a(name));
}

// Seed for the `index`-th member of a family (realizations, candidates, ...).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view name,
                                    std::uint64_t index) {
    return detail::splitmix64(derive_seed(base, name) ^
                              detail::splitmix64(index + 1));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t base, std::string_view name) {
    return Rng(derive_seed(base, name));
}

// Geometric draw with support {0, 1, 2, ...} via inverse CDF, so that p == 1
// deterministically yields 0 (std::geometric_distribution rejects p == 1).
inline int sample_geometric(double p, Rng& rng) {
    if (p >= 1.0) return 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    return static_cast<int>(std::log1p(-u) / std::log1p(-p));
}

}  // namespace sarx
