// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace qpat {

/// xorshift64* generator (Marsaglia shifts 12/25/27, multiplier
/// 0x2545F4914F6CDD1D). The 64-bit seed is passed once through SplitMix64 so
/// that small or zero seeds still give a nonzero, well-mixed state.
///
/// The sequence is part of the phantom file contract: reimplementations in
/// other languages must follow exactly these steps to replay a seed.
class XorShift64Star {
public:
    explicit XorShift64Star(std::uint64_t seed)
    {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        state_ = z != 0 ? z : 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next()
    {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace qpat
