#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace microct {

constexpr double kPi = 3.14159265358979323846;

// Dataset/checkpoint integrity failures (CLI exit code 3).
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptDataset : IntegrityError {
    using IntegrityError::IntegrityError;
};
struct UnsupportedVersion : IntegrityError {
    using IntegrityError::IntegrityError;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fold an angle to [-pi/2, pi/2); directions are unsigned (mod pi).
inline double fold_angle(double a) {
    while (a < -kPi / 2) a += kPi;
    while (a >= kPi / 2) a -= kPi;
    return a;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Splits [0, n) into contiguous chunks, one worker thread each. Every index
// writes only its own outputs, so results are identical for any thread count.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        body(0, n);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = static_cast<std::size_t>(w) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace microct
