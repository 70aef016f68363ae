#pragma once

#include <complex>
#include <functional>

#include "cib/alloc.hpp"
#include "cib/fft.hpp"
#include "cib/grid.hpp"

namespace cib {

/// Fourier coefficients of a real field on Grid(n), half-plane storage
/// (kx in [0,n/2], ky wrapped signed). Coefficients are the c_k of
/// f(x) = sum c_k e^{i k.x}; Hermitian symmetry ties (kx,ky) to (-kx,-ky).
struct SpectralField {
    Grid grid;
    aligned_vector<std::complex<double>> c;

    SpectralField() = default;
    explicit SpectralField(Grid g) : grid(g), c(fft::spectral_size(g.n)) {}

    int ncols() const { return grid.n / 2 + 1; }

    std::complex<double>& at(int kx, int ky) {
        int iy = ky < 0 ? ky + grid.n : ky;
        return c[std::size_t(iy) * ncols() + kx];
    }
    const std::complex<double>& at(int kx, int ky) const {
        int iy = ky < 0 ? ky + grid.n : ky;
        return c[std::size_t(iy) * ncols() + kx];
    }

    /// Hermitian weight of a stored entry: 2 if its mirror lives outside the
    /// stored half-plane, else 1 (kx = 0 and kx = n/2 columns).
    static int weight(int kx, int n) { return (kx == 0 || kx == n / 2) ? 1 : 2; }

    std::complex<double> mean() const { return c.empty() ? 0.0 : c[0]; }
};

/// d^m1/dx1 d^m2/dx2 by wavenumber multiplication; the Nyquist line is
/// zeroed whenever the derivative order along that axis is odd.
SpectralField derivative(const SpectralField& f, int m1, int m2);

/// Zero all modes with |k|_inf > kcut.
void truncate(SpectralField& f, int kcut);

/// Pad or truncate to a new grid; exact when f is band-limited below the
/// target Nyquist.
SpectralField resample(const SpectralField& f, Grid to);

/// Multiply each mode by s(|k|^2).
void scale_by_symbol(SpectralField& f, const std::function<double(double)>& s);

/// Restore exact Hermitian symmetry on the self-conjugate columns
/// (kx = 0, kx = n/2); used after assembling spectra by hand.
void enforce_hermitian(SpectralField& f);

/// sqrt(sum_{k != 0} |c_k|^2 |k|^{2s}), plain coefficient convention.
double hs_norm(const SpectralField& f, double s);

/// sqrt(sum_k |c_k|^2): l2 norm divided by 2*pi.
double coefficient_l2(const SpectralField& f);

/// Largest |k|_inf whose coefficient modulus exceeds tol * max modulus.
int active_band(const SpectralField& f, double tol = 1e-13);

/// Energy fraction carried by modes with |k|_inf > kcut.
double tail_fraction(const SpectralField& f, int kcut);

}  // namespace cib
