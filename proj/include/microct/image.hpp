#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace microct {

// Square grayscale grid, row-major, row 0 at the top. Pixel (i,j) center sits
// at physical ((j-(n-1)/2)*pitch, ((n-1)/2-i)*pitch), y axis up.
struct Image {
    std::size_t side = 0;
    double extent = 0.0;  // physical side length
    std::vector<double> data;

    Image() = default;
    Image(std::size_t side_, double extent_ = 0.0)
        : side(side_), extent(extent_ > 0 ? extent_ : static_cast<double>(side_)),
          data(side_ * side_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * side + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * side + j]; }
    std::size_t size() const { return data.size(); }
    double pixel_pitch() const { return side ? extent / static_cast<double>(side) : 0.0; }
};

// Angle-major grid of line integrals; row a holds all detector offsets of
// projection angle a.
struct Sinogram {
    std::size_t num_angles = 0;
    std::size_t num_detectors = 0;
    std::vector<double> data;

    Sinogram() = default;
    Sinogram(std::size_t angles, std::size_t detectors)
        : num_angles(angles), num_detectors(detectors), data(angles * detectors, 0.0) {}

    double& at(std::size_t a, std::size_t d) { return data[a * num_detectors + d]; }
    double at(std::size_t a, std::size_t d) const { return data[a * num_detectors + d]; }
    std::size_t size() const { return data.size(); }
};

inline Image make_image_for(const ScanGeometry& g) {
    return Image(g.image_size, g.image_extent());
}

inline Sinogram make_sinogram_for(const ScanGeometry& g) {
    return Sinogram(g.angles_measured.size(), g.num_detectors);
}

inline void check_image_matches(const Image& u, const ScanGeometry& g) {
    if (u.side != g.image_size)
        throw std::invalid_argument("image side does not match geometry image_size");
}

inline void check_sinogram_matches(const Sinogram& m, const ScanGeometry& g) {
    if (m.num_angles != g.angles_measured.size() || m.num_detectors != g.num_detectors)
        throw std::invalid_argument("sinogram shape does not match geometry");
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace microct
