#pragma once

#include <complex>
#include <functional>

#include "cib/field.hpp"

namespace cib::ref {

/// Direct-summation reference implementations. O(N^4) in the grid size, so
/// intended for small N in tests and the kernel benchmark; they share no
/// code path with the FFT-based production routines.

/// Full-plane DFT coefficients by direct summation.
SpectralField dft_direct(const ScalarField& f);

/// Derivative evaluated by direct mode sums.
ScalarField derivative_direct(const ScalarField& f, int m1, int m2);

/// Anti-divergence by the explicit mode-by-mode formula, direct sums.
SymTraceFreeTensor2Field anti_divergence_direct(const VectorField2& v);

/// Trapezoid (= exact for trig polynomials) quadrature of f over the torus.
double integral_quadrature(const ScalarField& f);

/// |integral of a(x) e^{i lambda k.x} dx| by direct quadrature.
double oscillatory_integral_quadrature(const ScalarField& a, int s1, int s2);

/// Pointwise product without any dealiasing (for comparing against the
/// truncated production product at small N).
ScalarField multiply_plain(const ScalarField& a, const ScalarField& b);

}  // namespace cib::ref
