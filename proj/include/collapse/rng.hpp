#pragma once

#include <bit>
#include <cstdint>
#include <limits>

namespace collapse {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
  public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t operator()() noexcept
    {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

  private:
    std::uint64_t state_;
};

/*!
 * xoshiro256** engine. A generator is addressed by (seed, stream): every trial
 * or sample chunk owns its stream, so results never depend on which thread
 * ran it.
 */
class Xoshiro256 {
  public:
    using result_type = std::uint64_t;

    Xoshiro256(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        SplitMix64 sm(seed ^ splitmix64_mix(stream + 0x632BE59BD9B4E019ULL));
        for (auto& word : s_) {
            word = sm();
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

  private:
    std::uint64_t s_[4];
};

// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Xoshiro256& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Exact uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_below(Xoshiro256& rng, std::uint64_t n) noexcept
{
    __uint128_t m = static_cast<__uint128_t>(rng()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<__uint128_t>(rng()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

// Stream id for chunk `chunk` of task `task`.
inline constexpr std::uint64_t stream_id(std::uint64_t task, std::uint64_t chunk) noexcept
{
    return (task << 32) ^ chunk;
}

}  // namespace collapse
