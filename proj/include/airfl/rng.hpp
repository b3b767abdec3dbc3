#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace airfl {

// Deterministic random source. All distributions are generated from raw
// mt19937_64 output so streams are reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (no spare caching, streams stay aligned).
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Circularly-symmetric complex Gaussian with total variance `var`.
    std::complex<double> complex_gaussian(double var = 1.0) {
        const double s = std::sqrt(var * 0.5);
        return {s * gaussian(), s * gaussian()};
    }

    // Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return gen_() % bound; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

// Stable stream derivation: FNV-1a over (master, round, tag), finalized with
// a splitmix64 mix. Distinct tags give statistically independent streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t round,
                                 std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix_byte = [&h](std::uint8_t b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(master >> (8 * i)));
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(round >> (8 * i)));
    for (char c : tag) mix_byte(static_cast<std::uint8_t>(c));
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

inline Rng derive_stream(std::uint64_t master, std::uint64_t round, std::string_view tag) {
    return Rng(derive_seed(master, round, tag));
}

}  // namespace airfl
