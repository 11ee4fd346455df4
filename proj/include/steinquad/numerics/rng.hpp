#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace steinquad {

// Deterministic random stream: xoshiro256** seeded through splitmix64.
// The generator is pinned here (not std::<random>) because uniform/normal
// distributions in the standard library are implementation-defined and the
// experiment CSVs must reproduce byte-for-byte. 256-bit state.
//
// A stream is single-owner: callers that parallelize fork independent
// child streams via split().
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) si = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via the polar (Marsaglia) method; caches the spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double r = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * r;
        has_spare_ = true;
        return u * r;
    }

    // 0 <= result < bound
    std::uint64_t next_below(std::uint64_t bound) {
        // modulo with rejection of the biased tail
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Derives an independently seeded child stream. Children with distinct
    // ids are distinct; forking advances this stream's state.
    RandomStream split(std::uint64_t id) {
        std::uint64_t x = next_u64() ^ (0x9e3779b97f4a7c15ULL * (id + 1));
        return RandomStream(splitmix64(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline RandomStream seeded_rng(std::uint64_t seed) { return RandomStream(seed); }

}  // namespace steinquad
