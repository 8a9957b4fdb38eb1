#pragma once

#include <cstdint>
#include <random>

namespace gcl {

// splitmix64 finalizer; good avalanche, used to fan one CLI seed out into
// well-separated per-purpose streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base) { return mix64(base); }

template <typename... Rest>
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Rest... rest) {
    return derive_seed(mix64(base ^ mix64(tag)), static_cast<std::uint64_t>(rest)...);
}

// purpose tags for derive_seed; keep values stable, they feed reproducibility
namespace rngtag {
constexpr std::uint64_t kInit = 0x11;
constexpr std::uint64_t kAugment = 0x22;
constexpr std::uint64_t kTriples = 0x33;
constexpr std::uint64_t kShuffle = 0x44;
constexpr std::uint64_t kDropout = 0x55;
constexpr std::uint64_t kSynth = 0x66;
constexpr std::uint64_t kProbe = 0x77;
constexpr std::uint64_t kKmeans = 0x88;
}  // namespace rngtag

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace gcl
