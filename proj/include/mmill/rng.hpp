#pragma once

#include <cstdint>
#include <limits>

namespace mmill {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ generator with a fixed stream-splitting rule.
///
/// Stream `s` of master seed `seed` is seeded by running SplitMix64 from
/// the state `splitmix64_mix(seed) ^ splitmix64_mix(s + 0x632BE59BD9B4E019)`
/// and taking four consecutive outputs as the 256-bit state. Every series of
/// a batch owns the stream equal to its index, so the draws a series sees do
/// not depend on which thread produced it or in what order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept { seed_state(seed); }

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
        return Rng(splitmix64_mix(seed) ^ splitmix64_mix(stream + 0x632BE59BD9B4E019ULL));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); safe to pass to log().
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    void seed_state(std::uint64_t seed) noexcept {
        std::uint64_t z = seed;
        for (auto& word : s_) {
            word = splitmix64_mix(z);
            z += 0x9E3779B97F4A7C15ULL;
        }
    }

    std::uint64_t s_[4]{};
};

}  // namespace mmill
