#ifndef BBM_RNG_HPP
#define BBM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bbm {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t GOLDEN_GAMMA = UINT64_C(0x9E3779B97F4A7C15);

// Deterministic genealogy ids: the root id and per-child derivation are pure
// functions of the parent id, so a subtree's identity (and hence its
// randomness) does not depend on traversal order or worker count.
inline constexpr std::uint64_t root_particle_id() noexcept { return mix64(1); }

inline constexpr std::uint64_t child_particle_id(std::uint64_t parent,
                                                 unsigned child_index) noexcept {
    return mix64(parent ^ (GOLDEN_GAMMA * (std::uint64_t(child_index) + 2)));
}

// Small splittable stream: one per particle, keyed by (trajectory seed,
// genealogy id). 8 bytes of state, sequential splitmix64 draws.
class RandomStream {
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t state) noexcept : state_(state) {}

    static RandomStream for_particle(std::uint64_t seed, std::uint64_t id) noexcept {
        return RandomStream(mix64(seed ^ mix64(id ^ GOLDEN_GAMMA)));
    }

    std::uint64_t next_u64() noexcept {
        state_ += GOLDEN_GAMMA;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log argument.
    double uniform_pos() noexcept {
        return double((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) noexcept {
        return -std::log(uniform_pos()) / rate;
    }

    // Box-Muller; one variate per call, two uniforms consumed.
    double gaussian() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0;
};

}  // namespace bbm

#endif
