#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qlab {

// splitmix64 finalizer; bijective avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// splitmix64 stream value at a given counter position.
constexpr std::uint64_t splitmix_at(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t fnv1a64(std::string_view s);

// Converts 64 random bits into a uniform double in [0, 1).
constexpr double u64_to_unit_double(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Seeded generator with hand-rolled distributions. std:: distributions are
// implementation-defined, so they are avoided everywhere determinism is part
// of the contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double next_double() { return u64_to_unit_double(eng_()); }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // unbiased uniform integer in [0, n), n > 0
    std::uint64_t below(std::uint64_t n);

    // standard normal (Box-Muller, cached spare)
    double normal();

    // in-place Fisher-Yates shuffle
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace qlab
