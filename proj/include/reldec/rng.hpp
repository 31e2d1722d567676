/*
 * rng.hpp — splittable counter-based random streams (Philox4x32-10).
 *
 * Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
 *
 * Every draw is a pure function of (stream key, position), so a stream can
 * be split per member index and sampled from any worker in any order while
 * producing bit-identical results to a serial run.
 */
#pragma once

#include <array>
#include <cstdint>

namespace reldec {

namespace philox {

inline constexpr std::uint32_t bump_a = 0x9E3779B9u;  // golden ratio
inline constexpr std::uint32_t bump_b = 0xBB67AE85u;  // sqrt(3) - 1
inline constexpr std::uint32_t mult_a = 0xD2511F53u;
inline constexpr std::uint32_t mult_b = 0xCD9E8D57u;

using block = std::array<std::uint32_t, 4>;
using key = std::array<std::uint32_t, 2>;

inline void round_once(block& ctr, const key& k) {
    const std::uint64_t prod0 = static_cast<std::uint64_t>(mult_a) * ctr[0];
    const std::uint64_t prod1 = static_cast<std::uint64_t>(mult_b) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
    ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
}

// The full 10-round bijection; the reference test vectors pin this down.
inline block encrypt(block ctr, key k) {
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, k);
        k[0] += bump_a;
        k[1] += bump_b;
    }
    return ctr;
}

}  // namespace philox

// One logical random stream. `split(i)` derives an independent child
// stream as a pure function of (parent key, i); `next_u64` advances the
// block counter.
class RngStream {
public:
    static RngStream root(std::uint64_t seed) { return RngStream(seed); }

    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const { return key_; }

    // Child stream keyed by (this stream, index). Distinct indices give
    // statistically independent streams.
    RngStream split(std::uint64_t index) const {
        const philox::block out = philox::encrypt(
            {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
             0x5f3759dfu, 0xc0ffee11u},
            {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
        return RngStream((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
    }

    std::uint64_t next_u64() {
        const philox::block out = philox::encrypt(
            {static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_ >> 32), 0u, 0u},
            {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
        ++pos_;
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t pos_ = 0;
};

// Stable 64-bit seed derivation for sub-tasks (scenario steps, optimizer
// restarts) that take a plain seed rather than a stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return RngStream::root(seed).split(index).key();
}

}  // namespace reldec
