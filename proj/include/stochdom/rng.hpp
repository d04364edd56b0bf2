#pragma once

#include <cstdint>
#include <random>

namespace stochdom::rng {

// Stateless 64-bit mix (splitmix64 finalizer). Used to derive independent
// substream identifiers from a master seed.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Engine keyed by (master, stream, role). The same triple always yields the
// same engine regardless of call order or thread count.
inline std::mt19937_64 engine_for(std::uint64_t master, std::uint64_t stream, std::uint64_t role = 0) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
        static_cast<std::uint32_t>(role),   static_cast<std::uint32_t>(role >> 32)};
    return std::mt19937_64(seq);
}

// Uniform draw on the open interval (0, 1): top 53 bits shifted to the cell
// midpoints, so 0 and 1 are unreachable and quantile transforms stay finite.
inline double next_open_unit(std::mt19937_64& eng) {
    const std::uint64_t bits = eng() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Index uniform on [0, n).
inline std::size_t next_index(std::mt19937_64& eng, std::size_t n) {
    auto idx = static_cast<std::size_t>(next_open_unit(eng) * static_cast<double>(n));
    return idx < n ? idx : n - 1;
}

// Value identifying one reproducible stream of draws.
struct Substream {
    std::uint64_t master{0};
    std::uint64_t stream{0};
    std::uint64_t role{0};

    std::mt19937_64 engine() const { return engine_for(master, stream, role); }
};

}  // namespace stochdom::rng
