#include "cib/spectral.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace cib {

SpectralField derivative(const SpectralField& f, int m1, int m2) {
    if (m1 < 0 || m2 < 0)
        throw std::invalid_argument("derivative: negative multi-index");
    const int n = f.grid.n;
    const int cols = f.ncols();
    SpectralField out(f.grid);
    const std::complex<double> I(0.0, 1.0);
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx) {
            std::complex<double> v = f.c[std::size_t(iy) * cols + kx];
            if ((m1 % 2 == 1 && kx == n / 2) || (m2 % 2 == 1 && ky == n / 2)) {
                v = 0.0;
            } else {
                for (int a = 0; a < m1; ++a) v *= I * double(kx);
                for (int a = 0; a < m2; ++a) v *= I * double(ky);
            }
            out.c[std::size_t(iy) * cols + kx] = v;
        }
    }
    return out;
}

void truncate(SpectralField& f, int kcut) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        const bool kill_row = std::abs(ky) > kcut;
        for (int kx = 0; kx < cols; ++kx)
            if (kill_row || kx > kcut) f.c[std::size_t(iy) * cols + kx] = 0.0;
    }
}

SpectralField resample(const SpectralField& f, Grid to) {
    const int n0 = f.grid.n, n1 = to.n;
    if (n0 == n1) return f;
    SpectralField out(to);
    const int cols0 = f.ncols(), cols1 = out.ncols();
    const int kmax = std::min(n0, n1) / 2;
    for (int ky = -kmax + 1; ky <= kmax; ++ky) {
        const int iy0 = ky < 0 ? ky + n0 : ky;
        const int iy1 = ky < 0 ? ky + n1 : ky;
        const int kx_hi = std::min(cols0 - 1, kmax);
        std::memcpy(&out.c[std::size_t(iy1) * cols1],
                    &f.c[std::size_t(iy0) * cols0],
                    sizeof(std::complex<double>) * (kx_hi + 1));
    }
    // When shrinking, the new Nyquist line aggregates modes that must stay
    // Hermitian; fields obeying the band discipline never reach it, but be
    // exact anyway.
    if (n1 < n0) enforce_hermitian(out);
    return out;
}

void scale_by_symbol(SpectralField& f, const std::function<double(double)>& s) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx)
            f.c[std::size_t(iy) * cols + kx] *= s(double(kx) * kx + double(ky) * ky);
    }
}

void enforce_hermitian(SpectralField& f) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    for (int kx : {0, n / 2}) {
        // pair (kx, ky) with (kx, -ky) inside the stored column
        for (int ky = 1; ky < n / 2; ++ky) {
            auto& a = f.c[std::size_t(ky) * cols + kx];
            auto& b = f.c[std::size_t(n - ky) * cols + kx];
            const std::complex<double> avg = 0.5 * (a + std::conj(b));
            a = avg;
            b = std::conj(avg);
        }
        f.c[std::size_t(0) * cols + kx] =
            f.c[std::size_t(0) * cols + kx].real();
        f.c[std::size_t(n / 2) * cols + kx] =
            f.c[std::size_t(n / 2) * cols + kx].real();
    }
}

double hs_norm(const SpectralField& f, double s) {
    if (s < 0) throw std::invalid_argument("hs_norm: s must be >= 0");
    const int n = f.grid.n;
    const int cols = f.ncols();
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx) {
            if (kx == 0 && ky == 0) continue;
            const double k2 = double(kx) * kx + double(ky) * ky;
            const double mag2 = std::norm(f.c[std::size_t(iy) * cols + kx]);
            acc += SpectralField::weight(kx, n) * mag2 * std::pow(k2, s);
        }
    }
    return std::sqrt(acc);
}

double coefficient_l2(const SpectralField& f) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int kx = 0; kx < cols; ++kx)
            acc += SpectralField::weight(kx, n) *
                   std::norm(f.c[std::size_t(iy) * cols + kx]);
    return std::sqrt(acc);
}

int active_band(const SpectralField& f, double tol) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    double peak = 0.0;
    for (const auto& v : f.c) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0;
    int band = 0;
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx) {
            if (std::abs(f.c[std::size_t(iy) * cols + kx]) > tol * peak)
                band = std::max(band, std::max(kx, std::abs(ky)));
        }
    }
    return band;
}

double tail_fraction(const SpectralField& f, int kcut) {
    const int n = f.grid.n;
    const int cols = f.ncols();
    double tail = 0.0, total = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx) {
            const double e = SpectralField::weight(kx, n) *
                             std::norm(f.c[std::size_t(iy) * cols + kx]);
            total += e;
            if (std::max(kx, std::abs(ky)) > kcut) tail += e;
        }
    }
    return total > 0 ? tail / total : 0.0;
}

}  // namespace cib
