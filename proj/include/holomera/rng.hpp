#pragma once

// All randomness in a run flows from one seed; each pipeline stage draws from
// its own substream keyed by name, so re-running a stage never shifts the
// random numbers seen by another.

#include <cstdint>
#include <random>
#include <string>

namespace holomera {

namespace detail {
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace detail

class Rng {
public:
    Rng(std::uint64_t seed, const std::string& stream)
        : engine_(detail::splitmix64(seed ^ detail::fnv1a(stream))) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform_symmetric() { return 2.0 * uniform() - 1.0; }

    /// Marsaglia polar method; avoids std::normal_distribution, whose output
    /// sequence is implementation-defined.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform_symmetric();
            v = uniform_symmetric();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::uint64_t integer() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace holomera
