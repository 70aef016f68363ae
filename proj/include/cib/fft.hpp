#pragma once

#include <complex>
#include <cstddef>

#include "cib/grid.hpp"

namespace cib::fft {

/// 2D r2c transform of an N x N real array (row-major, second axis slow).
/// Output is the N x (N/2+1) half-plane, unnormalized FFTW layout:
/// out[ky*(N/2+1)+kx] with kx in [0,N/2] and ky a wrapped signed index.
/// Input is preserved. Thread-safe after the plan for N exists.
void forward(int n, const double* in, std::complex<double>* out);

/// Inverse of `forward` including the 1/N^2 normalization. The spectral
/// input is left untouched (an internal scratch copy feeds FFTW's c2r).
void inverse(int n, const std::complex<double>* in, double* out);

/// Plan both directions for size n up front (avoids planning inside
/// parallel regions; planning is serialized internally either way).
void warm_plans(int n);

std::size_t spectral_size(int n);

}  // namespace cib::fft
