#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is a
// pure function of (key, counter), so streams are replayable and splittable
// without shared state. Distribution transforms are implemented here rather
// than via <random> so outputs are identical across standard libraries.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace mosindy {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Raw block for an explicit counter value.
    [[nodiscard]] Block block(std::uint64_t counter) const {
        Block ctr{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    [[nodiscard]] std::uint64_t next_u64() {
        if (buffered_ == 0) {
            buffer_ = block(counter_++);
            buffered_ = 2;
        }
        const std::size_t i = 2 - buffered_--;
        return (std::uint64_t{buffer_[2 * i]} << 32) | buffer_[2 * i + 1];
    }

    /// Uniform in [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) without modulo bias.
    [[nodiscard]] std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= limit) return r % bound;
        }
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    [[nodiscard]] double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    std::size_t buffered_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of 64-bit words; stable across platforms and runs.
[[nodiscard]] constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC908ull;
    for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
    return h;
}

[[nodiscard]] inline std::uint64_t bits_of(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

}  // namespace mosindy
