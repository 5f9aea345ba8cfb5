#ifndef GKB_SEEDING_HPP
#define GKB_SEEDING_HPP

#include <cstdint>
#include <string_view>

namespace gkb {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Stable per-stream seed from (master seed, replication index, stream name).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::string_view stream)
{
    return splitmix64(splitmix64(master ^ fnv1a(stream)) + replication);
}

} // namespace gkb

#endif
