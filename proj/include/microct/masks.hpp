#pragma once

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "io.hpp"

namespace microct {

enum class MaskKind { Full, Bow, X, Sparse };

inline const char* mask_kind_name(MaskKind k) {
    switch (k) {
        case MaskKind::Full: return "full";
        case MaskKind::Bow: return "bow";
        case MaskKind::X: return "x";
        default: return "sparse";
    }
}

inline MaskKind mask_kind_from_name(const std::string& s) {
    if (s == "full") return MaskKind::Full;
    if (s == "bow") return MaskKind::Bow;
    if (s == "x") return MaskKind::X;
    if (s == "sparse") return MaskKind::Sparse;
    throw std::invalid_argument("unknown mask kind '" + s + "'");
}

// Boolean filter support. Cell (i,j) has integer offset (dx, dy) =
// (j - c, c - i) from the center c = (p-1)/2, y up. Convention constant:
// angle-set normals map to stripe/cone directions rotated by +pi/2, so the
// mask covers the measured line directions (where the normal-operator kernel
// and the streaks live).
struct FilterMask {
    std::size_t size = 0;  // p, odd
    MaskKind kind = MaskKind::Full;
    std::size_t q = 0;
    std::vector<bool> support;
    std::size_t active_count = 0;

    bool at(std::size_t i, std::size_t j) const { return support[i * size + j]; }
};

namespace detail {

inline double point_line_distance(double dx, double dy, double line_angle) {
    // distance to the line through the origin with direction angle line_angle
    return std::abs(dx * std::sin(line_angle) - dy * std::cos(line_angle));
}

inline std::vector<bool> dilate_chebyshev(const std::vector<bool>& in, std::size_t p, std::size_t q) {
    if (q == 0) return in;
    std::vector<bool> out(in.size(), false);
    auto lp = static_cast<long>(p);
    auto lq = static_cast<long>(q);
    for (long i = 0; i < lp; ++i)
        for (long j = 0; j < lp; ++j) {
            if (!in[static_cast<std::size_t>(i * lp + j)]) continue;
            for (long di = -lq; di <= lq; ++di)
                for (long dj = -lq; dj <= lq; ++dj) {
                    long ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= lp || jj >= lp) continue;
                    out[static_cast<std::size_t>(ii * lp + jj)] = true;
                }
        }
    return out;
}

}  // namespace detail

inline FilterMask build_mask(MaskKind kind, const AngleSet& a, std::size_t p, std::size_t q) {
    if (p == 0 || p % 2 == 0) throw std::invalid_argument("build_mask: p must be odd");
    if ((kind == MaskKind::Bow || kind == MaskKind::X) && a.kind != AngleSetKind::LimitedInterval)
        throw std::invalid_argument("build_mask: bow/x masks require a limited-interval angle set");
    if (kind == MaskKind::Sparse && a.kind != AngleSetKind::SparseDiscrete)
        throw std::invalid_argument("build_mask: sparse mask requires a sparse-discrete angle set");

    FilterMask m;
    m.size = p;
    m.kind = kind;
    m.q = q;
    m.support.assign(p * p, false);
    const long c = static_cast<long>(p - 1) / 2;
    const double stripe = static_cast<double>(q) + 0.5;

    auto stripe_support = [&](const std::vector<double>& line_angles) {
        for (long i = 0; i < static_cast<long>(p); ++i)
            for (long j = 0; j < static_cast<long>(p); ++j) {
                double dx = static_cast<double>(j - c), dy = static_cast<double>(c - i);
                for (double la : line_angles)
                    if (detail::point_line_distance(dx, dy, la) <= stripe) {
                        m.support[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)] = true;
                        break;
                    }
            }
    };

    switch (kind) {
        case MaskKind::Full:
            m.support.assign(p * p, true);
            break;
        case MaskKind::X: {
            stripe_support({fold_angle(a.gamma + kPi / 2), fold_angle(-a.gamma + kPi / 2)});
            break;
        }
        case MaskKind::Sparse: {
            std::vector<double> lines;
            lines.reserve(a.angles.size());
            for (double w : a.angles) lines.push_back(fold_angle(w + kPi / 2));
            stripe_support(lines);
            break;
        }
        case MaskKind::Bow: {
            // Closed double cone of line directions, Chebyshev-dilated by q,
            // unioned with the boundary stripes so X(q) nests inside Bow(q).
            std::vector<bool> cone(p * p, false);
            for (long i = 0; i < static_cast<long>(p); ++i)
                for (long j = 0; j < static_cast<long>(p); ++j) {
                    double dx = static_cast<double>(j - c), dy = static_cast<double>(c - i);
                    if (dx == 0.0 && dy == 0.0) continue;
                    double delta = fold_angle(std::atan2(dy, dx) - kPi / 2);
                    if (std::abs(delta) <= a.gamma + kAngleTol)
                        cone[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)] = true;
                }
            cone = detail::dilate_chebyshev(cone, p, q);
            m.support = cone;
            stripe_support({fold_angle(a.gamma + kPi / 2), fold_angle(-a.gamma + kPi / 2)});
            break;
        }
    }

    m.support[static_cast<std::size_t>(c) * p + static_cast<std::size_t>(c)] = true;
    m.active_count = 0;
    for (bool b : m.support)
        if (b) ++m.active_count;
    return m;
}

inline void write_mask_pbm(const std::filesystem::path& path, const FilterMask& m) {
    write_pbm(path, m.support, m.size, m.size);
}

}  // namespace microct
