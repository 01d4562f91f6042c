#ifndef OCO_RNG_HPP
#define OCO_RNG_HPP

#include <cstdint>
#include <random>

namespace oco {

// splitmix64; used to derive independent per-trial streams from a master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// seed_i = hash(master, i); parallel-safe determinism for concurrent trials.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x51ed270b0a5199b1ULL));
}

using Rng = std::mt19937_64;

inline int rademacher(Rng& rng) {
    return (rng() & 1u) ? 1 : -1;
}

inline double uniform01(Rng& rng) {
    // 53-bit mantissa, identical across platforms
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace oco

#endif
