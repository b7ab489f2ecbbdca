#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace otrisk {

/**
 * Philox4x32-10 counter-based generator.
 *
 * The 64-bit key is the user seed; the 128-bit counter is split into a
 * 64-bit running block index (words 0-1) and a 64-bit stream id
 * (words 2-3), so independent streams are cheap: Rng(seed, k) for the
 * k-th replication. Identical (seed, stream) always reproduces the same
 * sequence on any platform.
 */
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block round10(Block ctr, std::uint32_t k0, std::uint32_t k1) {
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(ctr[0]);
            const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(ctr[2]);
            ctr = Block{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
                        static_cast<std::uint32_t>(p1),
                        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
                        static_cast<std::uint32_t>(p0)};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2511F53u;
    static constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_(stream) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buffer_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe under log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double a = 2.0 * std::numbers::pi * uniform();
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Gamma(shape, scale 1), Marsaglia-Tsang; shape < 1 via the U^{1/a} boost.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

    /// Stateless mixing of (seed, index) into a fresh 64-bit seed, used to
    /// give each grid replication its own stream id that is stable across
    /// thread counts.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        const auto out = Philox4x32::round10(
            {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
             0x5eedu, 0xde41u},
            static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
        return static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    }

private:
    void refill() {
        buffer_ = Philox4x32::round10(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            key0_, key1_);
        ++block_;
        pos_ = 0;
    }

    std::uint32_t key0_;
    std::uint32_t key1_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Block buffer_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace otrisk
