#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace ceeh {

// SplitMix64 step; used both as a generator and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream derivation: (seed, stream, a, b) -> 64-bit seed.
// Every sampling site derives its own generator so that replaying a step
// never depends on how many draws earlier steps consumed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t out = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ULL;
    out ^= splitmix64(s);
    s ^= a * 0xd1b54a32d192ed03ULL;
    out ^= splitmix64(s);
    s ^= b * 0x8cb92ba72f3d8dd7ULL;
    out ^= splitmix64(s);
    return out;
}

inline constexpr std::uint64_t kRolloutStream = 0x524f4c4c4f555453ULL;
inline constexpr std::uint64_t kEvalStream = 0x4556414c53545231ULL;
inline constexpr std::uint64_t kBatchStream = 0x4241544348535452ULL;
inline constexpr std::uint64_t kDatasetStream = 0x4453455453545231ULL;

// mt19937_64 is fully specified by the standard, so draws are identical
// across platforms; distributions are hand-rolled because the std ones are
// implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // [0, n)
    int uniform_int(int n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % bound);
    }

    // CDF walk; probs must sum to ~1. Last index absorbs rounding slack.
    int categorical(const Eigen::ArrayXd& probs) {
        const double u = uniform01();
        double cumulative = 0.0;
        for (Eigen::Index i = 0; i + 1 < probs.size(); ++i) {
            cumulative += probs[i];
            if (u < cumulative) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size() - 1);
    }

    // Box-Muller; deterministic unlike std::normal_distribution.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace ceeh
