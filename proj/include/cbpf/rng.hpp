#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cbpf {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derive an independent seed stream; order of arguments matters.
inline uint64_t seed_mix(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }
inline uint64_t seed_mix(uint64_t a, uint64_t b, uint64_t c) { return seed_mix(seed_mix(a, b), c); }

// mt19937_64 with hand-rolled distributions. The std:: distributions are
// implementation-defined, which would break bit-level reproducibility of
// seeded runs across toolchains; the raw engine output is standardized.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // [0, 1)
    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // {0, ..., n-1}, n > 0
    uint64_t below(uint64_t n) { return engine_() % n; }

    double gaussian(double sigma = 1.0) {
        double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        double u2 = uniform01();
        return sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace cbpf
