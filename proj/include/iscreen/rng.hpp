#pragma once

#include <cmath>
#include <cstdint>

namespace iscreen {

/// Deterministic splitmix64 stream. Self-contained so generated data is
/// identical across compilers and standard libraries; streams derived via
/// split() are independent of worker scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double next_open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; draws come in cached pairs.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_open_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    /// Child stream keyed by (this seed, stream index); stable under any
    /// interleaving of parent draws.
    static Rng split(std::uint64_t master_seed, std::uint64_t stream) {
        Rng mixer(master_seed ^ (0x632be59bd9b4e019ULL * (stream + 1)));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace iscreen
