#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "common.hpp"

namespace microct {

// Deterministic RNG with hand-pinned distributions. mt19937_64 is fully
// specified by the standard; uniform/normal are derived here so sampled
// values never depend on the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Derive an independent stream, e.g. per sample index.
    static Rng derive(std::uint64_t master_seed, std::uint64_t stream) {
        std::uint64_t mix[2] = {master_seed, stream};
        return Rng(fnv1a64(mix, sizeof(mix)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Box-Muller; caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates, pinned order
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace microct
