#pragma once

#include <cstdint>
#include <cmath>

namespace sle {

// Deterministic counter-seeded RNG streams.
//
// Every Monte-Carlo consumer derives its stream from (master_seed, key) so
// ensembles are order-independent and resumable: replica k always sees the
// same numbers no matter how many workers run or in which order cells are
// refined.  The generator is xoshiro256** seeded through splitmix64; both
// are fully specified so results do not depend on the standard library.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless mix of a master seed with a stream key.
inline uint64_t mix_seed(uint64_t master, uint64_t key) {
    uint64_t s = master ^ (0x9e3779b97f4a7c15ULL + (key << 1));
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b >> 17) ^ key;
}

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(uint64_t master, uint64_t key) {
        uint64_t s = mix_seed(master, key);
        for (auto& w : state_) w = splitmix64(s);
        have_spare_ = false;
    }

    uint64_t next_u64() {
        uint64_t* s = state_;
        const uint64_t result = rotl(s[1] * 5, 7) * 9;
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform on (0,1); never returns 0
    double uniform() {
        uint64_t u = next_u64() >> 11;   // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    // uniform on (lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Marsaglia polar (avoids libm sin/cos variance)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace sle
