#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace emc {

// Counter-based stream derivation: every path owns an independent generator
// keyed by (seed, stream ids). Results are therefore invariant under any
// parallel schedule.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ seeded through splitmix64 from up to three stream keys.
class PathRng {
public:
    using result_type = std::uint64_t;

    PathRng(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0,
            std::uint64_t stream_c = 0) {
        std::uint64_t sm = seed;
        sm ^= 0x6a09e667f3bcc909ULL + splitmix64(sm);
        sm ^= stream_a * 0xff51afd7ed558ccdULL;
        (void)splitmix64(sm);
        sm ^= stream_b * 0xc4ceb9fe1a85ec53ULL;
        (void)splitmix64(sm);
        sm ^= stream_c * 0x2545f4914f6cdd1dULL;
        for (auto& word : state_) word = splitmix64(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0,1); never returns 0 or 1.
    double uniform() {
        // 53 random mantissa bits, offset half an ulp away from the endpoints
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method (spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_;
    bool has_spare_;
};

}  // namespace emc
