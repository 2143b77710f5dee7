#pragma once

#include <cstdint>
#include <initializer_list>

namespace npivqb {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: the master seed is folded with each counter
// in order through splitmix64, so seeds depend only on (master, counters).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t c : counters) s = splitmix64(s ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
    return s;
}

}  // namespace npivqb
