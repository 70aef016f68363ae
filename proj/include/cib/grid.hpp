#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

namespace cib {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Uniform N x N grid on [0,2pi)^2. N even, N >= 8.
/// Node (ix,iy) sits at x = (2pi ix/N, 2pi iy/N); storage is row-major with
/// ix contiguous (index iy*N + ix). Spectral wavenumbers run over
/// {-N/2+1,...,N/2}^2.
struct Grid {
    int n = 0;

    Grid() = default;
    explicit Grid(int n_) : n(n_) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("Grid: N must be even and >= 8");
    }

    double spacing() const { return kTwoPi / n; }
    std::size_t size() const { return std::size_t(n) * n; }
    double x1(int ix) const { return kTwoPi * ix / n; }
    double x2(int iy) const { return kTwoPi * iy / n; }
    int nyquist() const { return n / 2; }
    /// Largest wavenumber kept by the product dealiasing rule.
    int dealias_cut() const { return n / 3; }

    bool operator==(const Grid& o) const { return n == o.n; }
    bool operator!=(const Grid& o) const { return n != o.n; }
};

/// Signed wavenumber for a storage index along one axis.
inline int signed_wavenumber(int idx, int n) {
    return (idx <= n / 2) ? idx : idx - n;
}

}  // namespace cib
