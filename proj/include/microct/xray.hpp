#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "image.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace microct {

namespace detail {

// Radix-2 in-place FFT; sizes here are always powers of two.
inline void fft(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> a = x[i + k];
                std::complex<double> b = x[i + k + len / 2] * w;
                x[i + k] = a + b;
                x[i + k + len / 2] = a - b;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& v : x) v /= static_cast<double>(n);
}

}  // namespace detail

// Discrete X-ray transform as an explicit sparse operator. Rays are marched
// at step pixel_pitch/2 with bilinear interpolation; the backprojector is the
// exact transpose, so <Ru, m> = <u, R^T m> holds to rounding.
class Projector {
  public:
    explicit Projector(const ScanGeometry& g, unsigned threads = 1) : geom_(g) {
        g.validate();
        build(threads);
    }

    const ScanGeometry& geometry() const { return geom_; }

    Sinogram forward(const Image& u, unsigned threads = 1) const {
        check_image_matches(u, geom_);
        Sinogram m = make_sinogram_for(geom_);
        const double* ud = u.data.data();
        double* md = m.data.data();
        parallel_for(m.size(), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                double acc = 0.0;
                for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                    acc += weight_[k] * ud[col_idx_[k]];
                md[r] = acc;
            }
        });
        return m;
    }

    Image adjoint(const Sinogram& m, unsigned threads = 1) const {
        check_sinogram_matches(m, geom_);
        Image u = make_image_for(geom_);
        const double* md = m.data.data();
        double* ud = u.data.data();
        parallel_for(u.size(), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t p = lo; p < hi; ++p) {
                double acc = 0.0;
                for (std::size_t k = t_row_ptr_[p]; k < t_row_ptr_[p + 1]; ++k)
                    acc += t_weight_[k] * md[t_col_idx_[k]];
                ud[p] = acc;
            }
        });
        return u;
    }

    std::size_t nnz() const { return weight_.size(); }

  private:
    void build(unsigned threads) {
        const std::size_t n = geom_.image_size;
        const std::size_t n_angles = geom_.angles_measured.size();
        const std::size_t n_det = geom_.num_detectors;
        const std::size_t n_rows = n_angles * n_det;
        const double dx = geom_.pixel_pitch;
        const double half_extent = geom_.image_extent() / 2.0;
        const double step_target = dx / 2.0;

        std::vector<std::vector<std::uint32_t>> cols(n_angles);
        std::vector<std::vector<double>> vals(n_angles);
        std::vector<std::vector<std::size_t>> offsets(n_angles);  // per-row start within the angle block

        parallel_for(n_angles, threads, [&](std::size_t alo, std::size_t ahi) {
            std::vector<double> dense(n * n, 0.0);
            std::vector<std::uint32_t> touched;
            touched.reserve(1024);
            for (std::size_t a = alo; a < ahi; ++a) {
                const double omega = geom_.angles_measured[a];
                const double wx = std::cos(omega), wy = std::sin(omega);
                const double qx = -wy, qy = wx;  // line direction = normal rotated +90 deg
                offsets[a].resize(n_det + 1, 0);
                for (std::size_t d = 0; d < n_det; ++d) {
                    offsets[a][d] = cols[a].size();
                    const double s =
                        (static_cast<double>(d) - (static_cast<double>(n_det) - 1.0) / 2.0) *
                        geom_.detector_pitch;
                    const double px = s * wx, py = s * wy;
                    // Clip the ray to the image square.
                    double tmin = -1e30, tmax = 1e30;
                    bool empty = false;
                    auto clip = [&](double p0, double dq) {
                        if (std::abs(dq) < 1e-15) {
                            if (p0 < -half_extent || p0 > half_extent) empty = true;
                            return;
                        }
                        double t0 = (-half_extent - p0) / dq;
                        double t1 = (half_extent - p0) / dq;
                        if (t0 > t1) std::swap(t0, t1);
                        tmin = std::max(tmin, t0);
                        tmax = std::min(tmax, t1);
                    };
                    clip(px, qx);
                    clip(py, qy);
                    if (empty || tmax <= tmin) continue;
                    const auto steps = static_cast<std::size_t>(
                        std::ceil((tmax - tmin) / step_target));
                    const double dt = (tmax - tmin) / static_cast<double>(steps);
                    touched.clear();
                    for (std::size_t k = 0; k < steps; ++k) {
                        const double t = tmin + (static_cast<double>(k) + 0.5) * dt;
                        const double x = px + t * qx, y = py + t * qy;
                        const double fx = x / dx + (static_cast<double>(n) - 1.0) / 2.0;
                        const double fy = (static_cast<double>(n) - 1.0) / 2.0 - y / dx;
                        const double fj = std::floor(fx), fi = std::floor(fy);
                        const double tx = fx - fj, ty = fy - fi;
                        const auto j0 = static_cast<long>(fj), i0 = static_cast<long>(fi);
                        const double w00 = (1 - ty) * (1 - tx), w01 = (1 - ty) * tx;
                        const double w10 = ty * (1 - tx), w11 = ty * tx;
                        auto put = [&](long i, long j, double w) {
                            if (i < 0 || j < 0 || i >= static_cast<long>(n) || j >= static_cast<long>(n))
                                return;
                            if (w == 0.0) return;
                            auto idx = static_cast<std::uint32_t>(i * static_cast<long>(n) + j);
                            if (dense[idx] == 0.0) touched.push_back(idx);
                            dense[idx] += w * dt;
                        };
                        put(i0, j0, w00);
                        put(i0, j0 + 1, w01);
                        put(i0 + 1, j0, w10);
                        put(i0 + 1, j0 + 1, w11);
                    }
                    std::sort(touched.begin(), touched.end());
                    for (std::uint32_t idx : touched) {
                        cols[a].push_back(idx);
                        vals[a].push_back(dense[idx]);
                        dense[idx] = 0.0;
                    }
                }
                offsets[a][n_det] = cols[a].size();
            }
        });

        row_ptr_.assign(n_rows + 1, 0);
        std::size_t total = 0;
        for (std::size_t a = 0; a < n_angles; ++a) {
            for (std::size_t d = 0; d < n_det; ++d)
                row_ptr_[a * n_det + d] = total + offsets[a][d];
            total += cols[a].size();
        }
        row_ptr_[n_rows] = total;
        col_idx_.reserve(total);
        weight_.reserve(total);
        for (std::size_t a = 0; a < n_angles; ++a) {
            col_idx_.insert(col_idx_.end(), cols[a].begin(), cols[a].end());
            weight_.insert(weight_.end(), vals[a].begin(), vals[a].end());
        }

        // Transpose (pixel-major), built deterministically by counting sort;
        // entries within a pixel row stay ordered by sinogram bin.
        const std::size_t n_px = n * n;
        t_row_ptr_.assign(n_px + 1, 0);
        for (std::uint32_t c : col_idx_) t_row_ptr_[c + 1]++;
        for (std::size_t p = 0; p < n_px; ++p) t_row_ptr_[p + 1] += t_row_ptr_[p];
        t_col_idx_.resize(total);
        t_weight_.resize(total);
        std::vector<std::size_t> cursor(t_row_ptr_.begin(), t_row_ptr_.end() - 1);
        for (std::size_t r = 0; r < n_rows; ++r) {
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                std::size_t slot = cursor[col_idx_[k]]++;
                t_col_idx_[slot] = static_cast<std::uint32_t>(r);
                t_weight_[slot] = weight_[k];
            }
        }
    }

    ScanGeometry geom_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> weight_;
    std::vector<std::size_t> t_row_ptr_;
    std::vector<std::uint32_t> t_col_idx_;
    std::vector<double> t_weight_;
};

inline Sinogram radon_forward(const Image& u, const Projector& p, unsigned threads = 1) {
    return p.forward(u, threads);
}

inline Image radon_adjoint(const Sinogram& m, const Projector& p, unsigned threads = 1) {
    return p.adjoint(m, threads);
}

// Convenience one-shot forms; prefer holding a Projector when applying the
// operator more than once.
inline Sinogram radon_forward(const Image& u, const ScanGeometry& g, unsigned threads = 1) {
    return Projector(g, threads).forward(u, threads);
}

inline Image radon_adjoint(const Sinogram& m, const ScanGeometry& g, unsigned threads = 1) {
    return Projector(g, threads).adjoint(m, threads);
}

// sqrt of the largest eigenvalue of R^T R by power iteration, seeded.
inline double estimate_operator_norm(const Projector& p, std::size_t iterations, std::uint64_t seed) {
    if (iterations < 10) throw std::invalid_argument("estimate_operator_norm: iterations must be >= 10");
    Rng rng(seed);
    Image v = make_image_for(p.geometry());
    for (auto& x : v.data) x = rng.uniform(-1.0, 1.0);
    double lambda = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        double nv = norm2(v.data);
        if (nv == 0.0) return 0.0;
        for (auto& x : v.data) x /= nv;
        Image w = p.adjoint(p.forward(v));
        double lambda_new = dot(v.data, w.data);  // Rayleigh quotient = ||Rv||^2
        bool converged = it > 0 && std::abs(lambda_new - lambda) <= 1e-4 * std::abs(lambda_new);
        lambda = lambda_new;
        v = std::move(w);
        if (converged) break;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

inline double estimate_operator_norm(const ScanGeometry& g, std::size_t iterations, std::uint64_t seed) {
    return estimate_operator_norm(Projector(g), iterations, seed);
}

// Ramp-filter one sinogram in place (pure |xi| by default, optional Hann).
inline Sinogram ramp_filter(const Sinogram& m, const ScanGeometry& g, bool hann = false) {
    check_sinogram_matches(m, g);
    const std::size_t d_count = g.num_detectors;
    const std::size_t l = next_power_of_two(2 * d_count);
    Sinogram out = m;
    std::vector<std::complex<double>> buf(l);
    for (std::size_t a = 0; a < m.num_angles; ++a) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t d = 0; d < d_count; ++d) buf[d] = m.at(a, d);
        detail::fft(buf, false);
        for (std::size_t k = 0; k < l; ++k) {
            double f = static_cast<double>(k <= l / 2 ? k : l - k) /
                       (static_cast<double>(l) * g.detector_pitch);
            double gain = f;
            if (hann) {
                double frac = static_cast<double>(k <= l / 2 ? k : l - k) / (static_cast<double>(l) / 2.0);
                gain *= 0.5 * (1.0 + std::cos(kPi * frac));
            }
            buf[k] *= gain;
        }
        detail::fft(buf, true);
        for (std::size_t d = 0; d < d_count; ++d) out.at(a, d) = buf[d].real();
    }
    return out;
}

// Filtered backprojection: ramp per projection, matched backprojection,
// angular weight pi / num_angles_full_equivalent (times pitch factors).
inline Image fbp(const Sinogram& m, const Projector& p, bool hann = false, unsigned threads = 1) {
    const ScanGeometry& g = p.geometry();
    Sinogram filtered = ramp_filter(m, g, hann);
    Image u = p.adjoint(filtered, threads);
    double dtheta = g.angular_step();
    double scale = dtheta * g.detector_pitch / (g.pixel_pitch * g.pixel_pitch);
    for (auto& x : u.data) x *= scale;
    return u;
}

inline Image fbp(const Sinogram& m, const ScanGeometry& g, bool hann = false, unsigned threads = 1) {
    return fbp(m, Projector(g, threads), hann, threads);
}

// --- persistence: flat f32 + JSON sidecar (shape, geometry, scale) ---

inline void save_sinogram(const std::filesystem::path& base, const Sinogram& m,
                          const ScanGeometry& g, double scale) {
    write_f32(std::filesystem::path(base).concat(".f32"), m.data);
    nlohmann::json j;
    j["shape"] = {m.num_angles, m.num_detectors};
    j["geometry"] = to_json(g);
    j["scale"] = scale;
    write_text(std::filesystem::path(base).concat(".json"), j.dump(2) + "\n");
}

inline Sinogram load_sinogram(const std::filesystem::path& base, ScanGeometry* g_out = nullptr,
                              double* scale_out = nullptr) {
    auto j = nlohmann::json::parse(read_text(std::filesystem::path(base).concat(".json")));
    std::size_t a = j.at("shape").at(0).get<std::size_t>();
    std::size_t d = j.at("shape").at(1).get<std::size_t>();
    Sinogram m(a, d);
    m.data = read_f32(std::filesystem::path(base).concat(".f32"), a * d);
    if (g_out) *g_out = geometry_from_json(j.at("geometry"));
    if (scale_out) *scale_out = j.at("scale").get<double>();
    return m;
}

}  // namespace microct
