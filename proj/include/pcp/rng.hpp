#ifndef PCP_RNG_HPP
#define PCP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace pcp {

// splitmix64: portable 64-bit generator with a one-word state. Output is
// identical on every platform, which keeps generated instances and solver
// runs reproducible across builds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform integer in {0, ..., bound-1} by modulo; bias is negligible for
    // bound << 2^64 and the rule is trivially portable.
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    // uniform double in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform double in [lo, hi)
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // standard normal via the Marsaglia polar method, one spare cached
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// stateless mix of two words, used to derive per-call seeds
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2)));
    g.next_u64();
    return g.next_u64();
}

} // namespace pcp

#endif
