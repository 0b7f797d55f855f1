#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "image.hpp"

namespace microct {

enum class Orientation { F, H, V, D };  // (f)=phi x phi, (h)=psi x phi, (v)=phi x psi, (d)=psi x psi

inline char orientation_char(Orientation o) {
    switch (o) {
        case Orientation::F: return 'f';
        case Orientation::H: return 'h';
        case Orientation::V: return 'v';
        default: return 'd';
    }
}

struct SubbandRect {
    std::size_t row0 = 0, col0 = 0, side = 0;
    Orientation orientation = Orientation::F;
    std::size_t scale = 0;  // 0 = coarsest
};

// Multilevel Haar coefficients in the standard nested layout, approximation
// top-left. Subband id iota: 0 = (f); then (h),(v),(d) per scale from
// coarsest to finest, Q = 3*levels + 1.
struct WaveletCoeffs {
    std::size_t side = 0;
    std::size_t levels = 0;
    std::vector<double> data;

    WaveletCoeffs() = default;
    WaveletCoeffs(std::size_t side_, std::size_t levels_)
        : side(side_), levels(levels_), data(side_ * side_, 0.0) {}

    std::size_t subband_count() const { return 3 * levels + 1; }
    std::size_t coarsest_side() const { return side >> levels; }

    SubbandRect subband_rect(std::size_t iota) const {
        if (iota >= subband_count()) throw std::invalid_argument("subband id out of range");
        SubbandRect r;
        if (iota == 0) {
            r.side = coarsest_side();
            r.orientation = Orientation::F;
            r.scale = 0;
            return r;
        }
        std::size_t k = (iota - 1) / 3;            // scale index, 0 = coarsest detail
        std::size_t o = (iota - 1) % 3;            // 0=h, 1=v, 2=d
        std::size_t s = coarsest_side() << k;
        r.side = s;
        r.scale = k;
        switch (o) {
            case 0: r.row0 = 0; r.col0 = s; r.orientation = Orientation::H; break;
            case 1: r.row0 = s; r.col0 = 0; r.orientation = Orientation::V; break;
            default: r.row0 = s; r.col0 = s; r.orientation = Orientation::D; break;
        }
        return r;
    }

    double& at(std::size_t i, std::size_t j) { return data[i * side + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * side + j]; }

    std::vector<double> extract(const SubbandRect& r) const {
        std::vector<double> out(r.side * r.side);
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j)
                out[i * r.side + j] = at(r.row0 + i, r.col0 + j);
        return out;
    }

    void deposit(const SubbandRect& r, const std::vector<double>& patch, bool accumulate = false) {
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j) {
                double& c = at(r.row0 + i, r.col0 + j);
                double v = patch[i * r.side + j];
                c = accumulate ? c + v : v;
            }
    }
};

// Writable view of one subband rectangle; mutations go to the layout.
class SubbandView {
  public:
    SubbandView(WaveletCoeffs& w, std::size_t iota) : w_(w), r_(w.subband_rect(iota)) {}
    const SubbandRect& rect() const { return r_; }
    std::size_t side() const { return r_.side; }
    double& at(std::size_t i, std::size_t j) { return w_.at(r_.row0 + i, r_.col0 + j); }
    double at(std::size_t i, std::size_t j) const { return w_.at(r_.row0 + i, r_.col0 + j); }

  private:
    WaveletCoeffs& w_;
    SubbandRect r_;
};

inline SubbandView subband_view(WaveletCoeffs& w, std::size_t iota) { return SubbandView(w, iota); }

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// One orthonormal Haar split of the leading s x s block, in place.
inline void haar_step_forward(std::vector<double>& a, std::size_t stride, std::size_t s,
                              std::vector<double>& scratch) {
    std::size_t half = s / 2;
    for (std::size_t i = 0; i < s; ++i) {  // rows: pair columns
        double* row = a.data() + i * stride;
        for (std::size_t k = 0; k < half; ++k) {
            scratch[k] = (row[2 * k] + row[2 * k + 1]) * kInvSqrt2;
            scratch[half + k] = (row[2 * k] - row[2 * k + 1]) * kInvSqrt2;
        }
        for (std::size_t k = 0; k < s; ++k) row[k] = scratch[k];
    }
    for (std::size_t j = 0; j < s; ++j) {  // columns: pair rows
        for (std::size_t k = 0; k < half; ++k) {
            double x0 = a[(2 * k) * stride + j];
            double x1 = a[(2 * k + 1) * stride + j];
            scratch[k] = (x0 + x1) * kInvSqrt2;
            scratch[half + k] = (x0 - x1) * kInvSqrt2;
        }
        for (std::size_t k = 0; k < s; ++k) a[k * stride + j] = scratch[k];
    }
}

inline void haar_step_inverse(std::vector<double>& a, std::size_t stride, std::size_t s,
                              std::vector<double>& scratch) {
    std::size_t half = s / 2;
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t k = 0; k < half; ++k) {
            double lo = a[k * stride + j];
            double hi = a[(half + k) * stride + j];
            scratch[2 * k] = (lo + hi) * kInvSqrt2;
            scratch[2 * k + 1] = (lo - hi) * kInvSqrt2;
        }
        for (std::size_t k = 0; k < s; ++k) a[k * stride + j] = scratch[k];
    }
    for (std::size_t i = 0; i < s; ++i) {
        double* row = a.data() + i * stride;
        for (std::size_t k = 0; k < half; ++k) {
            double lo = row[k];
            double hi = row[half + k];
            scratch[2 * k] = (lo + hi) * kInvSqrt2;
            scratch[2 * k + 1] = (lo - hi) * kInvSqrt2;
        }
        for (std::size_t k = 0; k < s; ++k) row[k] = scratch[k];
    }
}

}  // namespace detail

inline WaveletCoeffs haar_analyze(const Image& u, std::size_t levels) {
    if (levels == 0) throw std::invalid_argument("haar_analyze: levels must be >= 1");
    if (u.side == 0 || u.side % (std::size_t{1} << levels) != 0)
        throw std::invalid_argument("haar_analyze: side not divisible by 2^levels");
    WaveletCoeffs w(u.side, levels);
    w.data = u.data;
    std::vector<double> scratch(u.side);
    std::size_t s = u.side;
    for (std::size_t l = 0; l < levels; ++l) {
        detail::haar_step_forward(w.data, u.side, s, scratch);
        s /= 2;
    }
    return w;
}

inline Image haar_synthesize(const WaveletCoeffs& w, double extent = 0.0) {
    Image u(w.side, extent);
    u.data = w.data;
    std::vector<double> scratch(w.side);
    std::size_t s = w.side >> (w.levels - 1);
    for (std::size_t l = 0; l < w.levels; ++l) {
        detail::haar_step_inverse(u.data, w.side, s, scratch);
        s *= 2;
    }
    return u;
}

// Apply W to a raw coefficient-shaped array (same layout as an image).
inline std::vector<double> haar_analyze_flat(const std::vector<double>& x, std::size_t side,
                                             std::size_t levels) {
    Image tmp(side);
    tmp.data = x;
    return haar_analyze(tmp, levels).data;
}

inline std::vector<double> haar_synthesize_flat(const std::vector<double>& x, std::size_t side,
                                                std::size_t levels) {
    WaveletCoeffs w(side, levels);
    w.data = x;
    return haar_synthesize(w).data;
}

}  // namespace microct
