#pragma once

#include <algorithm>
#include <cmath>

#include "image.hpp"

namespace microct {

inline constexpr double kPsnrCap = 99.0;  // reported for exact matches

// 10 log10(range^2 / MSE), range taken from the reference.
inline double psnr(const Image& u, const Image& ref) {
    if (u.side != ref.side) throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
        double d = u.data[i] - ref.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(u.data.size());
    if (mse == 0.0) return kPsnrCap;
    auto [lo, hi] = std::minmax_element(ref.data.begin(), ref.data.end());
    double range = *hi - *lo;
    if (range == 0.0) return -kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(range * range / mse));
}

namespace detail {

// Separable Gaussian blur, symmetric (reflected) borders.
inline std::vector<double> gaussian_blur(const std::vector<double>& x, std::size_t n,
                                         const std::vector<double>& kernel) {
    const long r = static_cast<long>(kernel.size() / 2);
    const long ln = static_cast<long>(n);
    auto reflect = [ln](long i) {
        while (i < 0 || i >= ln) {
            if (i < 0) i = -i - 1;
            if (i >= ln) i = 2 * ln - 1 - i;
        }
        return i;
    };
    std::vector<double> tmp(n * n), out(n * n);
    for (long i = 0; i < ln; ++i)
        for (long j = 0; j < ln; ++j) {
            double acc = 0.0;
            for (long k = -r; k <= r; ++k)
                acc += kernel[static_cast<std::size_t>(k + r)] *
                       x[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(reflect(j + k))];
            tmp[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = acc;
        }
    for (long i = 0; i < ln; ++i)
        for (long j = 0; j < ln; ++j) {
            double acc = 0.0;
            for (long k = -r; k <= r; ++k)
                acc += kernel[static_cast<std::size_t>(k + r)] *
                       tmp[static_cast<std::size_t>(reflect(i + k)) * n + static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = acc;
        }
    return out;
}

}  // namespace detail

// Windowed SSIM: 11x11 Gaussian, sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic
// range from the reference, averaged over the map.
inline double ssim(const Image& u, const Image& ref) {
    if (u.side != ref.side) throw std::invalid_argument("ssim: shape mismatch");
    const std::size_t n = u.side;
    std::vector<double> kernel(11);
    {
        double sum = 0.0;
        for (int k = -5; k <= 5; ++k) {
            double v = std::exp(-0.5 * (k / 1.5) * (k / 1.5));
            kernel[static_cast<std::size_t>(k + 5)] = v;
            sum += v;
        }
        for (auto& v : kernel) v /= sum;
    }
    auto [lo, hi] = std::minmax_element(ref.data.begin(), ref.data.end());
    double range = *hi - *lo;
    if (range <= 0.0) range = 1e-12;  // stabilizers keep the degenerate case finite
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    std::vector<double> xy(n * n), xx(n * n), yy(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
        xy[i] = u.data[i] * ref.data[i];
        xx[i] = u.data[i] * u.data[i];
        yy[i] = ref.data[i] * ref.data[i];
    }
    auto mu_x = detail::gaussian_blur(u.data, n, kernel);
    auto mu_y = detail::gaussian_blur(ref.data, n, kernel);
    auto m_xx = detail::gaussian_blur(xx, n, kernel);
    auto m_yy = detail::gaussian_blur(yy, n, kernel);
    auto m_xy = detail::gaussian_blur(xy, n, kernel);

    double acc = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        double sx = m_xx[i] - mu_x[i] * mu_x[i];
        double sy = m_yy[i] - mu_y[i] * mu_y[i];
        double sxy = m_xy[i] - mu_x[i] * mu_y[i];
        double num = (2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * sxy + c2);
        double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (sx + sy + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(n * n);
}

struct MetricReport {
    std::vector<double> psnr_values;
    std::vector<double> ssim_values;

    void add(const Image& u, const Image& ref) {
        psnr_values.push_back(psnr(u, ref));
        ssim_values.push_back(ssim(u, ref));
    }

    double mean_psnr() const {
        double s = 0.0;
        for (double v : psnr_values) s += v;
        return psnr_values.empty() ? 0.0 : s / static_cast<double>(psnr_values.size());
    }

    double mean_ssim() const {
        double s = 0.0;
        for (double v : ssim_values) s += v;
        return ssim_values.empty() ? 0.0 : s / static_cast<double>(ssim_values.size());
    }
};

}  // namespace microct
