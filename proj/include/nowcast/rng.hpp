#pragma once
// Every random stream is derived from the master seed by a stable text label
// ("month=2020-04/stage=align-jobkeeper"), so streams never depend on the
// order in which months or stages execute.

#include <cstdint>
#include <random>
#include <string_view>

namespace nowcast {

using Rng = std::mt19937_64;

constexpr std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label)
{
    return splitmix64(master ^ splitmix64(fnv1a64(label)));
}

inline Rng make_rng(std::uint64_t master, std::string_view label) { return Rng{derive_seed(master, label)}; }

// Uniform draw in [0, 1) taken from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace nowcast
