#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace betaeff {

// SplitMix64 finalizer: bijective on 64-bit words, good avalanche.
inline std::uint64_t fmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Collapses (seed, salt words) into one key. Streams are derived from
// counters rather than advanced sequentially, so results never depend on
// thread scheduling or evaluation order.
inline std::uint64_t derive_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = fmix64(seed + 0x9e3779b97f4a7c15ull);
    for (std::uint64_t w : words)
        h = fmix64(h ^ fmix64(w + 0x9e3779b97f4a7c15ull));
    return h;
}

// xoshiro256++ (Blackman & Vigna), state seeded through SplitMix64.
// One instance per replication; cheap to construct.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {
        std::uint64_t sm = key;
        for (auto& w : s_) {
            sm += 0x9e3779b97f4a7c15ull;
            w = fmix64(sm);
        }
    }

    std::uint64_t key() const { return key_; }

    // Independent child stream addressed by (a, b).
    RngStream substream(std::uint64_t a, std::uint64_t b = 0) const {
        return RngStream(derive_key(key_, {a, b}));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1): 53-bit mantissa, offset by half an
    // ulp so 0 and 1 are unreachable (log/quantile safe).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Marsaglia polar; second deviate cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // Gamma(shape, 1) via Marsaglia & Tsang squeeze; shape < 1 handled by the
    // boost identity G(a) = G(a+1) * U^{1/a}.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform01(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Beta(p, q) as G(p) / (G(p) + G(q)).
    double beta(double p, double q) {
        const double g1 = gamma(p);
        const double g2 = gamma(q);
        return g1 / (g1 + g2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t key_;
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace betaeff
