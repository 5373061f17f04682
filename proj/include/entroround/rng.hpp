// Deterministic random number generation.
//
// Every randomized routine takes an explicit 64-bit seed and draws from the
// xoshiro256** generator seeded through splitmix64, so traces are reproducible
// bit-for-bit across runs of the same binary. Gaussians come from the
// Box-Muller transform (two uniforms -> two normals, one cached), documented
// here rather than delegated to std::normal_distribution whose stream is
// implementation defined.
#pragma once

#include <cmath>
#include <cstdint>

namespace entroround {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-run seed from (master seed, run index); parallel and serial schedules
// that partition runs by index therefore see identical streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_index) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ULL * (run_index + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next() {
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

    // Uniform on [0,1): top 53 bits scaled by 2^-53.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]: avoids log(0) in Box-Muller.
    double uniform01_open_low() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Fair coin.
    bool flip() { return (next() >> 63) != 0; }

    // Uniform integer in [0, bound) by rejection of the biased tail.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Stream of standard normals. The mirrored view negates every draw, which
// negates downstream trajectories exactly (IEEE negation is exact).
class GaussianSource {
  public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sign_;
        }
        const double u1 = rng_.uniform01_open_low();
        const double u2 = rng_.uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle) * sign_;
    }

    void mirror() { sign_ = -sign_; }

  private:
    Xoshiro256 rng_;
    double spare_ = 0.0;
    double sign_ = 1.0;
    bool has_spare_ = false;
};

}  // namespace entroround
