#pragma once

#include <array>
#include <optional>

#include "cib/field.hpp"

namespace cib {

// ------------------------------------------------------------ derivatives

/// Exact partial derivative d^m1_1 d^m2_2 f by wavenumber multiplication.
ScalarField spectral_derivative(const ScalarField& f, int m1, int m2);

/// Perpendicular gradient (-d2 f, d1 f); divergence-free by construction.
VectorField2 grad_perp(const ScalarField& f);

VectorField2 gradient(const ScalarField& f);

ScalarField divergence(const VectorField2& v);

/// Row-wise divergence of the reconstructed tensor:
/// (d1 T11 + d2 T12, d1 T12 - d2 T11).
VectorField2 divergence_tensor(const SymTraceFreeTensor2Field& t);

ScalarField laplacian(const ScalarField& f);

// ------------------------------------------------------------ norms

double sup_norm(const ScalarField& f);
double sup_norm(const VectorField2& v);
double sup_norm(const SymTraceFreeTensor2Field& t);

/// L2 norm with the flat measure on [0,2pi)^2.
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField2& v);

double mean(const ScalarField& f);
double integral(const ScalarField& f);

double hs_norm(const ScalarField& f, double s);
double hs_norm(const VectorField2& v, double s);

/// sum_{|beta|<=m} of the C^0 norms of all derivatives (max over components
/// for vectors/tensors is applied by the callers).
double cm_norm(const ScalarField& f, int m);

/// Discrete estimate of the Hoelder seminorm [f]_{m+alpha}: maximum of
/// |D^beta f(x) - D^beta f(y)| / |x-y|^alpha over |beta| = m and a set of
/// grid offsets with torus distance in (0, pi]. Offsets cover all short
/// separations densely and larger ones on a geometric ladder; the result
/// is a lower bound of the true seminorm. For alpha = 0 and m = 0 this is
/// the sup norm; for alpha = 0, m >= 1 the max derivative sup norm.
double holder_seminorm(const ScalarField& f, int m, double alpha);
double holder_seminorm(const VectorField2& v, int m, double alpha);
double holder_seminorm(const SymTraceFreeTensor2Field& t, int m, double alpha);

/// Full Hoelder norm ||f||_m + [f]_{m+alpha}.
double holder_norm(const ScalarField& f, int m, double alpha);

struct NormReport {
    double sup = 0, l2 = 0, hs = 0;
    std::array<double, 5> cm{};  // C^0..C^4
};
NormReport norms(const ScalarField& f, double s);

// ------------------------------------------------------------ algebra

ScalarField add(const ScalarField& a, const ScalarField& b, double wb = 1.0);
void add_in_place(ScalarField& a, const ScalarField& b, double wb = 1.0);

/// Pointwise product evaluated on the finer of the two grids and truncated
/// to that grid's dealias cut; exact when both factors obey the band
/// discipline (band <= N/3).
ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b);

/// Resample to a new grid by spectral padding/truncation.
ScalarField resample(const ScalarField& f, Grid to);
VectorField2 resample(const VectorField2& f, Grid to);
SymTraceFreeTensor2Field resample(const SymTraceFreeTensor2Field& f, Grid to);

/// Zero all modes above |k|_inf = kcut.
ScalarField band_truncate(const ScalarField& f, int kcut);

int active_band(const ScalarField& f, double tol = 1e-13);

}  // namespace cib
