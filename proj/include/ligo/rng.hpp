#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "ligo/matrix.hpp"

namespace ligo {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}
} // namespace detail

/// Deterministic PRNG stream. Algorithm is pinned: xoshiro256++ with the
/// state expanded from the 64-bit seed via splitmix64. The integer stream
/// is platform-exact; uniform() builds doubles from the top 53 bits and
/// normal() applies Box-Muller (two uniforms per call, no cached spare),
/// so float outputs are bit-identical wherever libm is correctly rounded.
class RngState {
  public:
    explicit RngState(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Unbiased integer in [0, n). Lemire's multiply-reject method.
    std::uint32_t below(std::uint32_t n) {
        if (n == 0) return 0;
        while (true) {
            const std::uint32_t x = static_cast<std::uint32_t>(next_u64());
            const std::uint64_t m = std::uint64_t(x) * n;
            const std::uint32_t low = static_cast<std::uint32_t>(m);
            if (low >= n || low >= std::uint32_t(-std::int64_t(n)) % n)
                return static_cast<std::uint32_t>(m >> 32);
        }
    }

    /// Independent child stream; forking does not advance this stream.
    RngState fork(std::uint64_t tag) const {
        std::uint64_t sm = seed_ ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
        return RngState(detail::splitmix64(sm));
    }

    RngState fork(std::string_view tag) const { return fork(detail::fnv1a64(tag)); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_ = 0;
};

template <class T>
void fill_normal(Mat<T>& m, RngState& rng, double stddev) {
    for (T& v : m.values()) v = static_cast<T>(rng.normal() * stddev);
}

} // namespace ligo
