#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace riscatter {

// Deterministic splitmix64 generator. All randomness in the library goes
// through this class so that results are bit-reproducible across platforms
// (std::<distribution> implementations differ between standard libraries).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // one standard normal via Box-Muller (second value discarded, keeps the
    // call stateless)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double rayleigh(double scale) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return scale * std::sqrt(-2.0 * std::log(u));
    }

    // Knuth's method, fine for the small means used here
    std::uint32_t poisson(double mean) {
        const double limit = std::exp(-mean);
        double prod = 1.0;
        std::uint32_t n = 0;
        do {
            prod *= uniform();
            if (prod <= limit) return n;
            ++n;
        } while (n < 10000);
        return n;
    }

    // unbiased integer in [0, n) by rejection
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

  private:
    std::uint64_t state_;
};

// Child seed for a named substream: FNV-1a over (master, name, index) with a
// splitmix finalizer. Keeps substreams uncorrelated without global state.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                                 std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix_byte = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ull;
    };
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(master >> (8 * i)));
    for (char c : component) mix_byte(static_cast<std::uint8_t>(c));
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(index >> (8 * i)));
    // finalize
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

}  // namespace riscatter
