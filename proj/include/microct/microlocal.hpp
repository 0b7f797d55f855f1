#pragma once

#include <cmath>
#include <vector>

#include "masks.hpp"
#include "wavelet.hpp"
#include "xray.hpp"

namespace microct {

// (position, unsigned normal direction): all the wavefront information this
// toolkit tracks.
struct EdgePoint {
    double x = 0.0, y = 0.0;   // physical coordinates, image center at origin
    double normal = 0.0;       // radians in [-pi/2, pi/2)
};

enum class Visibility { Visible, Invisible, Boundary };

inline const char* visibility_name(Visibility v) {
    switch (v) {
        case Visibility::Visible: return "visible";
        case Visibility::Invisible: return "invisible";
        default: return "boundary";
    }
}

// A singularity is detectable iff its normal lies in the measured set; normals
// at the set's boundary are the streak generators.
inline Visibility classify_visibility(double normal, const AngleSet& a, double tol = kAngleTol) {
    normal = fold_angle(normal);
    if (a.kind == AngleSetKind::LimitedInterval) {
        double d = std::abs(std::abs(normal) - a.gamma);
        if (d <= tol) return Visibility::Boundary;
        if (std::abs(normal) < a.gamma) return Visibility::Visible;
        return Visibility::Invisible;
    }
    double best = kPi;
    for (double w : a.angles) best = std::min(best, std::abs(fold_angle(normal - w)));
    if (std::abs(best - a.eta) <= tol) return Visibility::Boundary;
    if (best < a.eta) return Visibility::Visible;
    return Visibility::Invisible;
}

inline Visibility classify_visibility(const EdgePoint& e, const AngleSet& a, double tol = kAngleTol) {
    return classify_visibility(e.normal, a, tol);
}

// The line L(omega0, s0) an edge point can smear along.
struct StreakLine {
    double omega = 0.0;   // boundary angle of the set
    double offset = 0.0;  // s0 = x0 . omega0
    EdgePoint source;
};

inline std::vector<StreakLine> predict_streaks(const std::vector<EdgePoint>& edges, const AngleSet& a,
                                               double tol_angle = kAngleTol) {
    std::vector<StreakLine> out;
    const std::vector<double> boundary = a.boundary();
    for (const EdgePoint& e : edges)
        for (double w0 : boundary)
            if (std::abs(fold_angle(e.normal - w0)) <= tol_angle) {
                StreakLine s;
                s.omega = w0;
                s.offset = e.x * std::cos(w0) + e.y * std::sin(w0);
                s.source = e;
                out.push_back(s);
            }
    return out;
}

// Central-difference edge detector; feeds classify_visibility when no
// analytic specs are available.
inline std::vector<EdgePoint> extract_edges(const Image& u, double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("extract_edges: threshold must be > 0");
    std::vector<EdgePoint> out;
    if (u.side < 3) return out;
    const double dx = u.pixel_pitch();
    const double half = (static_cast<double>(u.side) - 1.0) / 2.0;
    for (std::size_t i = 1; i + 1 < u.side; ++i)
        for (std::size_t j = 1; j + 1 < u.side; ++j) {
            double gx = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * dx);
            double gy = (u.at(i - 1, j) - u.at(i + 1, j)) / (2.0 * dx);
            if (std::sqrt(gx * gx + gy * gy) <= threshold) continue;
            EdgePoint e;
            e.x = (static_cast<double>(j) - half) * dx;
            e.y = (half - static_cast<double>(i)) * dx;
            e.normal = fold_angle(std::atan2(gy, gx));
            out.push_back(e);
        }
    return out;
}

// Impulse-response estimate of the wavelet-domain kernels of W R^T R W^T:
// one unit impulse at each source subband's center, a matrix-free pass of the
// normal operator, and a centered crop per target subband. filters[iota*Q +
// iota'] is the p x p response of target iota to source iota'.
struct KernelAtlas {
    std::size_t num_subbands = 0;
    std::size_t patch_size = 0;
    std::vector<std::vector<double>> filters;

    const std::vector<double>& patch(std::size_t iota, std::size_t iota_src) const {
        return filters[iota * num_subbands + iota_src];
    }
};

inline KernelAtlas estimate_kernel_atlas(const Projector& proj, std::size_t levels, std::size_t p,
                                         unsigned threads = 1) {
    const ScanGeometry& g = proj.geometry();
    const std::size_t n = g.image_size;
    if (p % 2 == 0 || p == 0) throw std::invalid_argument("estimate_kernel_atlas: p must be odd");
    if (p > (n >> levels))
        throw std::invalid_argument("estimate_kernel_atlas: p exceeds the coarsest subband side");
    WaveletCoeffs probe(n, levels);
    const std::size_t q_count = probe.subband_count();
    KernelAtlas atlas;
    atlas.num_subbands = q_count;
    atlas.patch_size = p;
    atlas.filters.assign(q_count * q_count, std::vector<double>(p * p, 0.0));
    const long h = static_cast<long>(p - 1) / 2;

    parallel_for(q_count, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t src = lo; src < hi; ++src) {
            WaveletCoeffs w(n, levels);
            SubbandRect rs = w.subband_rect(src);
            w.at(rs.row0 + rs.side / 2, rs.col0 + rs.side / 2) = 1.0;
            Image img = haar_synthesize(w, g.image_extent());
            Image back = proj.adjoint(proj.forward(img));
            WaveletCoeffs resp = haar_analyze(back, levels);
            for (std::size_t tgt = 0; tgt < q_count; ++tgt) {
                SubbandRect rt = resp.subband_rect(tgt);
                const long s = static_cast<long>(rt.side);
                const long ci = s / 2, cj = s / 2;
                std::vector<double>& patch = atlas.filters[tgt * q_count + src];
                for (long di = -h; di <= h; ++di)
                    for (long dj = -h; dj <= h; ++dj) {
                        long ii = ((ci + di) % s + s) % s;  // periodic wavelets: wrap is exact
                        long jj = ((cj + dj) % s + s) % s;
                        patch[static_cast<std::size_t>(di + h) * p + static_cast<std::size_t>(dj + h)] =
                            resp.at(rt.row0 + static_cast<std::size_t>(ii),
                                    rt.col0 + static_cast<std::size_t>(jj));
                    }
            }
        }
    });
    return atlas;
}

inline double energy_fraction_inside(const std::vector<double>& patch, const FilterMask& mask) {
    double inside = 0.0, total = 0.0;
    for (std::size_t k = 0; k < patch.size(); ++k) {
        double e = patch[k] * patch[k];
        total += e;
        if (mask.support[k]) inside += e;
    }
    return total > 0.0 ? inside / total : 1.0;
}

}  // namespace microct
