#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fogsim {

/// SplitMix64 finalizer. Bijective 64-bit mixer used to derive stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-dependent hash of a tuple of 64-bit words.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words) h = mix64(h ^ (w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    return h;
}

/// Counter-based generator: the n-th output is mix64(key + n * golden). The
/// stream is fully determined by its key, so streams keyed on
/// (seed, x, y, sample) are independent of scheduling order.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}
    constexpr CounterRng(std::initializer_list<std::uint64_t> words) : key_(hash_words(words)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace fogsim
