#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cib {

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 points");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(std::max(y[i], 1e-300));
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

/// Cumulative integral of uniformly sampled data, 4th order: each step
/// integrates the Lagrange cubic through the four nearest samples (a two
/// point Gauss rule is exact for cubics). out[j] = integral over [t_0,t_j].
inline std::vector<double> cumulative_integral(std::span<const double> f,
                                               double dt) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    if (n < 4) {
        for (std::size_t j = 0; j + 1 < n; ++j)
            out[j + 1] = out[j] + 0.5 * dt * (f[j] + f[j + 1]);
        return out;
    }
    static const double gauss[2] = {-0.5773502691896257, 0.5773502691896257};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::size_t a = j == 0 ? 0 : j - 1;
        if (a + 3 >= n) a = n - 4;
        const double s = double(j) - double(a);
        double acc = 0.0;
        for (double g : gauss) {
            const double u = s + 0.5 + 0.5 * g;
            double val = 0.0;
            for (int i = 0; i < 4; ++i) {
                double p = 1.0;
                for (int m = 0; m < 4; ++m)
                    if (m != i) p *= (u - m) / double(i - m);
                val += p * f[a + i];
            }
            acc += 0.5 * val;
        }
        out[j + 1] = out[j] + dt * acc;
    }
    return out;
}

/// Cubic Lagrange weights on a uniform stencil at offsets {-1,0,1,2};
/// evaluates at theta in [0,1] measured from the second node.
inline std::array<double, 4> cubic_weights(double theta) {
    const double t = theta;
    return {-t * (t - 1) * (t - 2) / 6.0, (t + 1) * (t - 1) * (t - 2) / 2.0,
            -(t + 1) * t * (t - 2) / 2.0, (t + 1) * t * (t - 1) / 6.0};
}

/// Five-point 4th order first-derivative weights at sample `pos` of a
/// uniform 5-point stencil (pos in [0,4]), per unit spacing.
inline std::array<double, 5> fd5_weights(int pos) {
    switch (pos) {
        case 0: return {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4};
        case 1: return {-1.0 / 4, -5.0 / 6, 3.0 / 2, -1.0 / 2, 1.0 / 12};
        case 2: return {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
        case 3: return {-1.0 / 12, 1.0 / 2, -3.0 / 2, 5.0 / 6, 1.0 / 4};
        default: return {1.0 / 4, -4.0 / 3, 3.0, -4.0, 25.0 / 12};
    }
}

}  // namespace cib
