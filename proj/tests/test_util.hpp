#pragma once

#include <microct/microct.hpp>

namespace testutil {

// Disk of the given radius and value, 3x3 supersampled rim.
inline microct::Image disk_image(std::size_t side, double radius, double value = 1.0) {
    microct::Image u(side);
    const double half = (static_cast<double>(side) - 1.0) / 2.0;
    static constexpr double sub[3] = {-1.0 / 3.0, 0.0, 1.0 / 3.0};
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            double x = static_cast<double>(j) - half;
            double y = half - static_cast<double>(i);
            int hits = 0;
            for (double sy : sub)
                for (double sx : sub)
                    if ((x + sx) * (x + sx) + (y + sy) * (y + sy) <= radius * radius) ++hits;
            u.at(i, j) = value * static_cast<double>(hits) / 9.0;
        }
    return u;
}

// Disk with a C1 smoothstep rim; gradient directions on the rim are exactly
// radial up to discretization.
inline microct::Image soft_disk_image(std::size_t side, double radius, double value = 1.0,
                                      double rim = 4.0) {
    microct::Image u(side);
    const double half = (static_cast<double>(side) - 1.0) / 2.0;
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            double x = static_cast<double>(j) - half;
            double y = half - static_cast<double>(i);
            double sd = std::sqrt(x * x + y * y) - radius;
            double t = std::min(1.0, std::max(0.0, 0.5 - sd / rim));
            u.at(i, j) = value * t * t * (3.0 - 2.0 * t);
        }
    return u;
}

inline microct::Image random_image(std::size_t side, std::uint64_t seed) {
    microct::Rng rng(seed);
    microct::Image u(side);
    for (auto& x : u.data) x = rng.uniform(-1.0, 1.0);
    return u;
}

inline microct::Sinogram random_sinogram(const microct::ScanGeometry& g, std::uint64_t seed) {
    microct::Rng rng(seed);
    microct::Sinogram m = microct::make_sinogram_for(g);
    for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
    return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
