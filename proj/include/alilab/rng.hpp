#pragma once

#include <cmath>
#include <cstdint>

namespace alilab {

// xoshiro256** seeded through splitmix64. The generator is pinned by algorithm,
// not by library, so a given (seed, stream) produces the same bit stream on any
// platform. Streams are separated by offsetting the splitmix seed; normals use
// Box-Muller and always consume uniforms in pairs (the odd draw is cached).
class Rng {
public:
    Rng() : Rng(0, 0) {}

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t x = seed + stream * 0x9e3779b97f4a7c15ULL;
        for (auto& w : state_) w = splitmix64(x);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Unbiased integer in [0, n) via widening multiply with rejection.
    std::uint64_t bounded(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = -n % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stream tags for deriving independent substreams from one run seed.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kEvalData = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kTrain = 4;
inline constexpr std::uint64_t kEval = 5;
// Search forks one stream per run: kSearch + run_index (run indices < 100).
inline constexpr std::uint64_t kSearch = 6;
inline constexpr std::uint64_t kTrainEval = 200;  // periodic coverage snapshots
inline constexpr std::uint64_t kEvalRecon = 201;  // reconstruction noise
inline constexpr std::uint64_t kEvalLatent = 202; // occupancy noise
inline constexpr std::uint64_t kEvalInterp = 203;
inline constexpr std::uint64_t kEvalInvert = 204;
inline constexpr std::uint64_t kEvalCond = 205; // conditional row-compliance eval
inline constexpr std::uint64_t kEvalClass = 206; // semi-supervised accuracy eval
} // namespace streams

} // namespace alilab
