#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace metaxfer {

// Deterministic seeded RNG. mt19937_64 has a standard-mandated output
// sequence; the distribution transforms below are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// byte-identical reproduction across standard libraries.
class Prng {
public:
    explicit Prng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform double in [0, 1), 53 random bits
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), rejection sampled (n > 0)
    uint64_t below(uint64_t n) {
        const uint64_t reject_under = (~n + 1) % n;  // 2^64 mod n
        uint64_t x = gen_();
        while (x < reject_under) x = gen_();
        return x % n;
    }

    // Box-Muller; consumes two uniforms per draw
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * r * std::cos(two_pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (size_t i = items.size() - 1; i > 0; --i) {
            const size_t j = static_cast<size_t>(below(i + 1));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64 step; used to derive independent sub-seeds from one seed
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// FNV-1a 64-bit; stable cross-platform string hash for seed derivation and
// content fingerprints
uint64_t fnv1a64(std::string_view text);

std::string to_hex(uint64_t value);

}  // namespace metaxfer
