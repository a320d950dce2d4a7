#pragma once

#include <cmath>
#include <cstdint>

namespace perfdrift {

/// SplitMix64 (Steele, Lea & Flood 2014; Vigna's public-domain constants).
/// Used everywhere randomness is needed so results are identical across
/// platforms and standard-library versions. std::mt19937 is portable but the
/// std distributions are not; the draws below are fully specified.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). Modulo reduction; the bias is below
    /// 2^-32 for the bounds used here (segment lengths).
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; never zero, safe for log().
    double next_unit_open() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal draw via Box-Muller (one draw per two uniforms; the
    /// second branch is discarded to keep the stream position predictable).
    double next_gaussian() {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t state_;
};

/// SplitMix64 finalizer as a one-shot hash.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and up to three
/// context words (segment bounds, trial index). Each permutation trial gets
/// its own derived stream, so trials can be evaluated in any order with
/// identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (b + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (c + 0x9e3779b97f4a7c15ULL));
    return h;
}

} // namespace perfdrift
