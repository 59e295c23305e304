#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace dodgerl {

// xoshiro256++ seeded through splitmix64. Hand-rolled instead of <random>
// so that seeded runs reproduce bit-for-bit regardless of the standard
// library's distribution implementations, and so the full generator state
// can live inside a simulator snapshot.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) {
            // splitmix64 step
            x += 0x9e3779b97f4a7c15ull;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, n). Multiply-shift keeps the bias far below
    // anything a statistical test at these sample sizes can see.
    uint32_t below(uint32_t n) {
        return static_cast<uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1).
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    float uniform(float lo, float hi) {
        return lo + static_cast<float>(real01()) * (hi - lo);
    }

    bool chance(double p) { return real01() < p; }

    // Standard normal via Box-Muller. Draws two words per call; no cached
    // spare, so copying the generator copies the full sampling state.
    double normal() {
        double u1 = real01();
        while (u1 <= 0.0) u1 = real01();
        const double u2 = real01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::array<uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

    friend bool operator==(const Rng& a, const Rng& b) { return a.state_ == b.state_; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
};

} // namespace dodgerl
