#pragma once

#include <cmath>
#include <cstdint>

namespace lo {

/// xoshiro256** with splitmix64 seeding. Bit-exact across platforms so
/// that simulations are reproducible from (config, seed) alone.
class Rng {
public:
    explicit Rng(uint64_t seed)
    {
        uint64_t z = seed;
        for (auto& s : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            uint64_t x = z;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            s = x ^ (x >> 31);
        }
    }

    uint64_t next()
    {
        uint64_t* s = state_;
        uint64_t result = rotl(s[1] * 5, 7) * 9;
        uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// Uniform in [0, n). n must be > 0.
    uint64_t below(uint64_t n)
    {
        // Rejection sampling keeps the draw unbiased.
        uint64_t threshold = (-n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1).
    double uniform()
    {
        return double(next() >> 11) * 0x1.0p-53;
    }

    /// Exponential with the given mean.
    double exponential(double mean)
    {
        double u = uniform();
        return -mean * std::log1p(-u);
    }

    /// Fisher-Yates over [first, last).
    template <typename It>
    void shuffle(It first, It last)
    {
        auto n = last - first;
        for (decltype(n) i = n - 1; i > 0; --i) {
            auto j = static_cast<decltype(n)>(below(uint64_t(i) + 1));
            std::swap(first[i], first[j]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

} // namespace lo
