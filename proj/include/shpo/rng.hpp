#pragma once

// Seed scheme
// -----------
// Every random quantity in the library is a pure function of a 64-bit seed.
// Seeds compose through derive_seed(parent, a, b, ...), which folds each
// component into the parent with the SplitMix64 finalizer:
//
//     derive_seed(s)          = s
//     derive_seed(s, a, ...)  = derive_seed(mix(s ^ mix(a + GOLDEN)), ...)
//
// An experiment uses (master_seed, replication_index, sample_index) paths, so
// any single evaluation can be replayed in isolation without running the rest
// of the experiment. Consumers that draw from the same seed for different
// purposes (configuration bits vs. observation noise) first derive with a
// distinct purpose tag, which keeps their streams independent.
//
// Streams are SplitMix64 rather than std::<random> distributions because the
// latter are implementation-defined and would break byte-identical logs
// across standard libraries.

#include <cstdint>

namespace shpo {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return seed; }

template <class... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t component, Rest... rest) noexcept
{
    return derive_seed(mix64(seed ^ mix64(component + golden_gamma)),
                       static_cast<std::uint64_t>(rest)...);
}

/// Purpose tags for derive_seed. Values are part of the reproducibility
/// contract; never renumber.
namespace seed_tag {
inline constexpr std::uint64_t configuration = 0x01;
inline constexpr std::uint64_t noise = 0x02;
inline constexpr std::uint64_t restriction = 0x03;
inline constexpr std::uint64_t stage = 0x04;
inline constexpr std::uint64_t base = 0x05;
inline constexpr std::uint64_t collapse = 0x06;
inline constexpr std::uint64_t replication = 0x07;
inline constexpr std::uint64_t fidelity = 0x08;
inline constexpr std::uint64_t generator = 0x09;
inline constexpr std::uint64_t arm = 0x0A;
inline constexpr std::uint64_t bracket = 0x0B;
inline constexpr std::uint64_t evaluation = 0x0C;
} // namespace seed_tag

/// SplitMix64 stream.
class Stream {
public:
    explicit constexpr Stream(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    constexpr double uniform01() noexcept
    {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept
    {
        return lo + (hi - lo) * uniform01();
    }

    /// Unbiased integer in [0, bound); bound must be positive.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept
    {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    constexpr bool coin() noexcept { return (next() >> 63) != 0; }

private:
    std::uint64_t state_;
};

} // namespace shpo
