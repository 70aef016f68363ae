#include "cib/serial_ref.hpp"

#include <cmath>

namespace cib::ref {

SpectralField dft_direct(const ScalarField& f) {
    const Grid g = f.grid();
    const int n = g.n;
    SpectralField out(g);
    auto v = f.values();
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx <= n / 2; ++kx) {
            std::complex<double> acc = 0.0;
            for (int jy = 0; jy < n; ++jy)
                for (int jx = 0; jx < n; ++jx) {
                    const double ph =
                        -kTwoPi * (double(kx) * jx + double(ky) * jy) / n;
                    acc += v[std::size_t(jy) * n + jx] *
                           std::complex<double>(std::cos(ph), std::sin(ph));
                }
            out.c[std::size_t(iy) * (n / 2 + 1) + kx] = acc / (double(n) * n);
        }
    }
    return out;
}

namespace {
ScalarField eval_modes(
    const Grid& g,
    const std::function<std::complex<double>(int, int)>& coeff) {
    const int n = g.n;
    ScalarField out(g);
    auto v = out.mutable_values();
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            double acc = 0.0;
            for (int ky = -n / 2 + 1; ky <= n / 2; ++ky)
                for (int kx = -n / 2 + 1; kx <= n / 2; ++kx) {
                    const std::complex<double> c = coeff(kx, ky);
                    if (c == std::complex<double>(0.0)) continue;
                    const double ph = kTwoPi * (double(kx) * ix + double(ky) * iy) / n;
                    acc += (c * std::complex<double>(std::cos(ph), std::sin(ph)))
                               .real();
                }
            v[std::size_t(iy) * n + ix] = acc;
        }
    return out;
}

std::complex<double> full_plane_coeff(const SpectralField& s, int kx, int ky) {
    const int n = s.grid.n;
    if (kx >= 0) return s.at(kx, ky);
    if (kx == -n / 2) return 0.0;  // avoid double-counting the Nyquist column
    return std::conj(s.at(-kx, -ky));
}
}  // namespace

ScalarField derivative_direct(const ScalarField& f, int m1, int m2) {
    SpectralField s = dft_direct(f);
    const std::complex<double> I(0, 1);
    return eval_modes(f.grid(), [&](int kx, int ky) {
        if (kx < 0 && kx == -f.grid().n / 2) return std::complex<double>(0.0);
        std::complex<double> c = full_plane_coeff(s, kx, ky);
        const int n = f.grid().n;
        if ((m1 % 2 && std::abs(kx) == n / 2) || (m2 % 2 && std::abs(ky) == n / 2))
            return std::complex<double>(0.0);
        for (int a = 0; a < m1; ++a) c *= I * double(kx);
        for (int a = 0; a < m2; ++a) c *= I * double(ky);
        return c;
    });
}

SymTraceFreeTensor2Field anti_divergence_direct(const VectorField2& v) {
    SpectralField s1 = dft_direct(v.u1);
    SpectralField s2 = dft_direct(v.u2);
    const std::complex<double> I(0, 1);
    auto t11 = eval_modes(v.grid(), [&](int kx, int ky) {
        if (kx == 0 && ky == 0) return std::complex<double>(0.0);
        const double k2 = double(kx) * kx + double(ky) * ky;
        const std::complex<double> a = full_plane_coeff(s1, kx, ky);
        const std::complex<double> b = full_plane_coeff(s2, kx, ky);
        return -I / k2 * (a * double(kx) - b * double(ky));
    });
    auto t12 = eval_modes(v.grid(), [&](int kx, int ky) {
        if (kx == 0 && ky == 0) return std::complex<double>(0.0);
        const double k2 = double(kx) * kx + double(ky) * ky;
        const std::complex<double> a = full_plane_coeff(s1, kx, ky);
        const std::complex<double> b = full_plane_coeff(s2, kx, ky);
        return -I / k2 * (a * double(ky) + b * double(kx));
    });
    return {std::move(t11), std::move(t12)};
}

double integral_quadrature(const ScalarField& f) {
    auto v = f.values();
    double acc = 0.0;
    for (double x : v) acc += x;
    const double h = f.grid().spacing();
    return acc * h * h;
}

double oscillatory_integral_quadrature(const ScalarField& a, int s1, int s2) {
    const Grid g = a.grid();
    const int n = g.n;
    auto v = a.values();
    std::complex<double> acc = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double ph = kTwoPi * (double(s1) * ix + double(s2) * iy) / n;
            acc += v[std::size_t(iy) * n + ix] *
                   std::complex<double>(std::cos(ph), std::sin(ph));
        }
    const double h = g.spacing();
    return std::abs(acc) * h * h;
}

ScalarField multiply_plain(const ScalarField& a, const ScalarField& b) {
    ScalarField out(a.grid());
    auto va = a.values();
    auto vb = b.values();
    auto vo = out.mutable_values();
    for (std::size_t i = 0; i < va.size(); ++i) vo[i] = va[i] * vb[i];
    return out;
}

}  // namespace cib::ref
