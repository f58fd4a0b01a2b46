#pragma once

#include <cmath>
#include <cstdint>

#include "fvsim/linalg.hpp"

namespace fvsim {

// Counter-keyed random streams. Every consumer derives its own stream from
// (seed, stream tag, indices...), so simulations are reproducible and
// independent of scheduling or worker count.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream tags; part of the persisted reproducibility contract.
enum class StreamTag : uint64_t {
    replica = 1,        // one killed path per replica
    particle_step = 2,  // one particle move per (particle, step attempt)
    rebirth = 3,        // donor choice + fresh soft-kill clock
    init = 4,           // initial cloud sampling
    validator = 5,      // model validator sampling
    pair = 6,           // one coupled pair per replica
    misc = 7,
};

/// xoshiro256++ with Box-Muller normals; all draws are bit-reproducible.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    /// Derive an independent stream from (seed, tag, a, b).
    static Rng keyed(uint64_t seed, StreamTag tag, uint64_t a = 0, uint64_t b = 0) {
        uint64_t sm = seed;
        (void)splitmix64(sm);
        sm ^= splitmix64(sm) + static_cast<uint64_t>(tag);
        sm ^= splitmix64(sm) + a;
        sm ^= splitmix64(sm) + b;
        return Rng(splitmix64(sm));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    /// Integer uniform on {0, ..., n-1} (rejection, unbiased).
    uint64_t uniform_below(uint64_t n) {
        const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Vec normal_vec(int d) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = normal();
        return v;
    }

    /// Exp(1) draw.
    double exponential() { return -std::log(uniform_pos()); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    double spare_;
    bool has_spare_;
};

}  // namespace fvsim
