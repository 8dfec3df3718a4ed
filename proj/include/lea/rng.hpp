#pragma once

#include <cstdint>
#include <initializer_list>

namespace lea {

// SplitMix64. Chosen because its output is a pure function of a 64-bit
// state, which makes substreams trivial to derive and keeps every draw
// bit-identical across platforms (std:: distributions are not portable).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0,n). Multiply-shift; bias is < 2^-57 for the small n
    // used here.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform in [lo,hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a path of
// indices, e.g. (pair, side, word). Order-sensitive.
inline std::uint64_t substream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    for (std::uint64_t x : path) {
        h = mix64(h + 0x9e3779b97f4a7c15ULL + x);
    }
    return h;
}

inline SplitMix64 substream(std::uint64_t seed,
                            std::initializer_list<std::uint64_t> path) {
    return SplitMix64(substream_seed(seed, path));
}

} // namespace lea
