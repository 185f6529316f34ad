/**
 * @file rng.hpp
 * @brief Counter-based Philox4x32-10 generator and the variates the simulator draws
 *
 * A stream is identified by (seed, stream id). The 128-bit counter is laid
 * out as (block lo, block hi, stream lo, stream hi) and the 64-bit key is the
 * seed, so every (seed, stream) pair yields an independent, reproducible
 * sequence regardless of the order in which streams are consumed.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mvcone::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Ten rounds of Philox4x32 on one counter block.
inline Block philox4x32_10(Block ctr, Key key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Stream ids used by the library. The high bits tag the purpose so that the
/// paths used to estimate a constant never coincide with evaluation paths.
enum class Purpose : std::uint64_t { Evaluation = 0, Estimation = 1 };

inline std::uint64_t stream_id(Purpose p, std::uint64_t index) noexcept {
    return (static_cast<std::uint64_t>(p) << 56) ^ index;
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) {
            buf_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                 key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t a = next_u32() >> 5;
        const std::uint64_t b = next_u32() >> 6;
        return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by Box–Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 6.283185307179586476925 * uniform();
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    /// Poisson(mean) by inversion, in chunks of mean at most 10.
    std::uint32_t poisson(double mean) noexcept {
        std::uint32_t total = 0;
        while (mean > 0.0) {
            const double m = mean > 10.0 ? 10.0 : mean;
            mean -= m;
            double p = std::exp(-m);
            double cdf = p;
            const double u = uniform();
            std::uint32_t k = 0;
            while (u > cdf && k < 1000) {
                ++k;
                p *= m / k;
                cdf += p;
            }
            total += k;
        }
        return total;
    }

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mvcone::rng
