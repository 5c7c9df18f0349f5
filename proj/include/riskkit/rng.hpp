#pragma once

#include <cstdint>
#include <string_view>

namespace riskkit {

// Counter-free named substreams on top of splitmix64. Each stream is
// identified by (master seed, name, block index) so that the draws for a
// given node/block never depend on how many workers run the simulation.
namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// xoshiro256** seeded from (seed, stream name, block).
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view name, std::uint64_t block = 0) {
        std::uint64_t mix = master_seed ^ (detail::fnv1a(name) * 0x9e3779b97f4a7c15ULL)
                            ^ (block + 0x2545f4914f6cdd1dULL) * 0xda942042e4dd58b5ULL;
        for (auto& w : s_) w = detail::splitmix64(mix);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); safe to feed into quantile functions.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace riskkit
