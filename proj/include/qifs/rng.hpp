#pragma once

#include <cstdint>

namespace qifs {

/// SplitMix64 (Steele, Lea, Vigna). Fixed algorithm so that seeded runs are
/// reproducible across platforms and implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static const char* name() { return "splitmix64"; }

private:
    std::uint64_t state_;
};

}  // namespace qifs
