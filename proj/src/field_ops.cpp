#include "cib/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cib/kernels.hpp"

namespace cib {

ScalarField spectral_derivative(const ScalarField& f, int m1, int m2) {
    return ScalarField::from_spectral(derivative(f.spectral(), m1, m2));
}

VectorField2 grad_perp(const ScalarField& f) {
    const SpectralField s = f.spectral();
    ScalarField a = ScalarField::from_spectral(derivative(s, 0, 1));
    kernels::scale(a.mutable_values(), -1.0);
    return {std::move(a), ScalarField::from_spectral(derivative(s, 1, 0))};
}

VectorField2 gradient(const ScalarField& f) {
    const SpectralField s = f.spectral();
    return {ScalarField::from_spectral(derivative(s, 1, 0)),
            ScalarField::from_spectral(derivative(s, 0, 1))};
}

ScalarField divergence(const VectorField2& v) {
    SpectralField s = derivative(v.u1.spectral(), 1, 0);
    const SpectralField d2 = derivative(v.u2.spectral(), 0, 1);
    for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] += d2.c[i];
    return ScalarField::from_spectral(s);
}

VectorField2 divergence_tensor(const SymTraceFreeTensor2Field& t) {
    const SpectralField s11 = t.t11.spectral();
    const SpectralField s12 = t.t12.spectral();
    SpectralField a = derivative(s11, 1, 0);
    {
        const SpectralField b = derivative(s12, 0, 1);
        for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] += b.c[i];
    }
    SpectralField c = derivative(s12, 1, 0);
    {
        const SpectralField d = derivative(s11, 0, 1);
        for (std::size_t i = 0; i < c.c.size(); ++i) c.c[i] -= d.c[i];
    }
    return {ScalarField::from_spectral(a), ScalarField::from_spectral(c)};
}

ScalarField laplacian(const ScalarField& f) {
    SpectralField s = f.spectral();
    scale_by_symbol(s, [](double k2) { return -k2; });
    return ScalarField::from_spectral(s);
}

double sup_norm(const ScalarField& f) { return kernels::sup_abs(f.values()); }
double sup_norm(const VectorField2& v) {
    return std::max(sup_norm(v.u1), sup_norm(v.u2));
}
double sup_norm(const SymTraceFreeTensor2Field& t) {
    return std::max(sup_norm(t.t11), sup_norm(t.t12));
}

double l2_norm(const ScalarField& f) {
    const double ss = kernels::dot(f.values(), f.values());
    return std::sqrt(ss * kTwoPi * kTwoPi / double(f.grid().size()));
}
double l2_norm(const VectorField2& v) {
    const double a = l2_norm(v.u1), b = l2_norm(v.u2);
    return std::sqrt(a * a + b * b);
}

double mean(const ScalarField& f) {
    return kernels::sum(f.values()) / double(f.grid().size());
}
double integral(const ScalarField& f) {
    return mean(f) * kTwoPi * kTwoPi;
}

double hs_norm(const ScalarField& f, double s) { return hs_norm(f.spectral(), s); }
double hs_norm(const VectorField2& v, double s) {
    const double a = hs_norm(v.u1, s), b = hs_norm(v.u2, s);
    return std::sqrt(a * a + b * b);
}

namespace {

std::vector<std::pair<int, int>> multi_indices(int m) {
    std::vector<std::pair<int, int>> out;
    for (int m1 = m; m1 >= 0; --m1) out.emplace_back(m1, m - m1);
    return out;
}

/// Offsets for the pair maximization: the full square of small shifts plus
/// a geometric ladder of longer ones, all with torus distance <= pi.
std::vector<std::pair<int, int>> holder_offsets(int n) {
    std::vector<std::pair<int, int>> offs;
    const int dense = std::min(8, n / 2 - 1);
    for (int dy = 0; dy <= dense; ++dy)
        for (int dx = -dense; dx <= dense; ++dx) {
            if (dy == 0 && dx <= 0) continue;
            offs.emplace_back(dx, dy);
        }
    std::vector<int> ladder;
    for (int d = dense + 2; d <= n / 2; d = std::max(d + 1, d * 5 / 4))
        ladder.push_back(d);
    for (int d : ladder) {
        offs.emplace_back(d, 0);
        offs.emplace_back(0, d);
        offs.emplace_back(d, d);
        offs.emplace_back(d, -d);
        offs.emplace_back(d / 2, d);
        offs.emplace_back(d, d / 2);
    }
    return offs;
}

double offset_quotient_max(const ScalarField& f, double alpha) {
    const int n = f.grid().n;
    const double h = f.grid().spacing();
    auto v = f.values();
    double best = 0.0;
    for (auto [dx, dy] : holder_offsets(n)) {
        const double dist =
            std::hypot(h * std::min(std::abs(dx), n - std::abs(dx)),
                       h * std::min(std::abs(dy), n - std::abs(dy)));
        if (dist > 3.14159265358979324 || dist == 0.0) continue;
        const double w = std::pow(dist, -alpha);
        double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m) if (kernels::parallel_enabled())
        for (int iy = 0; iy < n; ++iy) {
            const int jy = (iy + dy + n) % n;
            for (int ix = 0; ix < n; ++ix) {
                const int jx = (ix + dx + n) % n;
                const double d = std::abs(v[std::size_t(jy) * n + jx] -
                                          v[std::size_t(iy) * n + ix]);
                m = std::max(m, d);
            }
        }
        best = std::max(best, m * w);
    }
    return best;
}

}  // namespace

double holder_seminorm(const ScalarField& f, int m, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0)
        throw std::invalid_argument("holder_seminorm: alpha must be in [0,1)");
    double best = 0.0;
    for (auto [m1, m2] : multi_indices(m)) {
        const ScalarField g =
            (m1 == 0 && m2 == 0) ? f : spectral_derivative(f, m1, m2);
        best = std::max(best, alpha == 0.0 ? sup_norm(g)
                                           : offset_quotient_max(g, alpha));
    }
    return best;
}

double holder_seminorm(const VectorField2& v, int m, double alpha) {
    return std::max(holder_seminorm(v.u1, m, alpha),
                    holder_seminorm(v.u2, m, alpha));
}
double holder_seminorm(const SymTraceFreeTensor2Field& t, int m, double alpha) {
    return std::max(holder_seminorm(t.t11, m, alpha),
                    holder_seminorm(t.t12, m, alpha));
}

double cm_norm(const ScalarField& f, int m) {
    double total = 0.0;
    for (int j = 0; j <= m; ++j) {
        double layer = 0.0;
        for (auto [m1, m2] : multi_indices(j))
            layer += sup_norm(j == 0 ? f : spectral_derivative(f, m1, m2));
        total += layer;
    }
    return total;
}

double holder_norm(const ScalarField& f, int m, double alpha) {
    return cm_norm(f, m) + holder_seminorm(f, m, alpha);
}

NormReport norms(const ScalarField& f, double s) {
    NormReport r;
    r.sup = sup_norm(f);
    r.l2 = l2_norm(f);
    r.hs = hs_norm(f, s);
    for (int m = 0; m <= 4; ++m) r.cm[m] = cm_norm(f, m);
    return r;
}

ScalarField add(const ScalarField& a, const ScalarField& b, double wb) {
    ScalarField out = a;
    kernels::axpy(wb, b.values(), out.mutable_values());
    return out;
}

void add_in_place(ScalarField& a, const ScalarField& b, double wb) {
    kernels::axpy(wb, b.values(), a.mutable_values());
}

ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b) {
    const Grid g = a.grid().n >= b.grid().n ? a.grid() : b.grid();
    const ScalarField& fa = a.grid() == g ? a : resample(a, g);
    const ScalarField& fb = b.grid() == g ? b : resample(b, g);
    ScalarField out(g);
    kernels::multiply(fa.values(), fb.values(), out.mutable_values());
    return band_truncate(out, g.dealias_cut());
}

ScalarField resample(const ScalarField& f, Grid to) {
    if (f.grid() == to) return f;
    return ScalarField::from_spectral(cib::resample(f.spectral(), to));
}
VectorField2 resample(const VectorField2& f, Grid to) {
    return {resample(f.u1, to), resample(f.u2, to)};
}
SymTraceFreeTensor2Field resample(const SymTraceFreeTensor2Field& f, Grid to) {
    return {resample(f.t11, to), resample(f.t12, to)};
}

ScalarField band_truncate(const ScalarField& f, int kcut) {
    SpectralField s = f.spectral();
    truncate(s, kcut);
    return ScalarField::from_spectral(s);
}

int active_band(const ScalarField& f, double tol) {
    return active_band(f.spectral(), tol);
}

}  // namespace cib
