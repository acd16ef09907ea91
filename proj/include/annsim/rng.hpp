#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace annsim::rng {

// Stable stream labels so derived seeds never collide across subsystems.
enum class Stream : std::uint64_t {
    directions = 1,
    recording = 2,
    disjoint_class = 3,
    pretraining = 4,
    permutation = 5,
    annotator = 6,
    run = 7,
    mlp = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic seed derivation; mixing is order-sensitive (base is mixed
// before the stream label is folded in, so swapping arguments or repeating
// the same value cannot collide the way a plain xor of hashes would).
inline std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) + stream);
}

inline std::uint64_t derive(std::uint64_t base, Stream s) {
    return derive(base, static_cast<std::uint64_t>(s));
}

inline std::uint64_t derive(std::uint64_t base, Stream s, std::uint64_t index) {
    return derive(derive(base, s), index);
}

// FNV-1a; lets string identities (class names) seed derivation chains.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

using Engine = std::mt19937_64;

inline Engine engine(std::uint64_t seed) { return Engine(seed); }

inline std::vector<double> gaussian_vector(Engine& rng, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
}

// Random direction on the unit sphere.
inline std::vector<double> unit_vector(Engine& rng, std::size_t dim) {
    for (;;) {
        auto v = gaussian_vector(rng, dim);
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 > 1e-24) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& x : v) x *= inv;
            return v;
        }
    }
}

}  // namespace annsim::rng
