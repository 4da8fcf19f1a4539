#pragma once

#include <cstdint>
#include <cmath>

namespace pcol {

// Counter-based randomness: every consumer derives its stream from a 64-bit
// key via splitmix-style mixing, so results do not depend on call order or
// thread scheduling and are identical across platforms.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent sub-key (restart index, trial index, shard index...).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0xd1b54a32d192ed03ULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit mantissa.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0,1], safe as a log() argument.
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    std::uint32_t next_below(std::uint32_t bound) {
        return static_cast<std::uint32_t>(next_u64() % bound);
    }

    // Box-Muller; no cached spare so the stream stays position-independent.
    double next_gaussian() {
        const double u = next_double_open();
        const double v = next_double();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

private:
    std::uint64_t state_;
};

} // namespace pcol
