#ifndef LSW_RNG_HPP
#define LSW_RNG_HPP

// Counter-based random streams.
//
// Every stream is Philox4x32-10 (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC'11) keyed by a 64-bit seed.  The 128-bit counter is
// split into a 64-bit stream id (high half) and a 64-bit block index (low
// half), so (seed, stream) pairs never share a block.  Variates are derived
// with fixed transforms (Box-Muller, inverse CDF) rather than <random>
// distributions, whose output is implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lsw {

/// Identifies one random stream: a key plus a sub-stream index.
struct Seed {
    std::uint64_t key = 0;
    std::uint64_t stream = 0;

    constexpr Seed() = default;
    constexpr Seed(std::uint64_t k) : key(k) {}  // NOLINT(google-explicit-constructor)
    constexpr Seed(std::uint64_t k, std::uint64_t s) : key(k), stream(s) {}

    friend constexpr bool operator==(const Seed&, const Seed&) = default;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for replication `index` of a study keyed by `master`.  Distinct
/// indices land on distinct Philox counters, so streams cannot collide.
constexpr Seed replication_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return Seed{mix64(master), index};
}

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53U;
    constexpr std::uint32_t kM1 = 0xCD9E8D57U;
    constexpr std::uint32_t kW0 = 0x9E3779B9U;
    constexpr std::uint32_t kW1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

}  // namespace detail

/// Sequential view over one Philox stream.  Cheap to construct; not shared
/// between threads.
class RandomStream {
public:
    explicit RandomStream(Seed seed) noexcept
        : key_{static_cast<std::uint32_t>(seed.key), static_cast<std::uint32_t>(seed.key >> 32)},
          stream_(seed.stream) {}

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the sine branch is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Double exponential with unit rate (variance 2), by inverse CDF.
    double laplace() noexcept {
        const double u = uniform();
        return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
    }

    /// Student-t with integer degrees of freedom: Z / sqrt(chi2_df / df).
    double student_t(int df) noexcept {
        const double z = normal();
        double chi2 = 0.0;
        for (int i = 0; i < df; ++i) {
            const double g = normal();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / df);
    }

private:
    void refill() noexcept {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buf_ = detail::philox4x32_10(ctr, key_);
        ++block_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lsw

#endif  // LSW_RNG_HPP
