#include "cib/building_blocks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cib/kernels.hpp"
#include "cib/util.hpp"

namespace cib {

std::pair<int, int> Direction::scaled(int lambda) const {
    if (!integer_multiple(lambda))
        throw std::invalid_argument("Direction: lambda*k not in Z^2");
    return {int(std::int64_t(lambda) * n1 / 5),
            int(std::int64_t(lambda) * n2 / 5)};
}

namespace {

std::array<Direction, 3> plus_set_for(int index) {
    if (index == 0) return {Direction{5, 0}, Direction{3, 4}, Direction{3, -4}};
    if (index == 1) return {Direction{0, 5}, Direction{-4, 3}, Direction{4, 3}};
    throw std::invalid_argument("DirectionFamily: index must be 0 or 1");
}

/// Invert the 3x3 system vec(R) = M c with columns 2*vec(k x k),
/// vec(S) = (S11, S12, S22).
std::array<std::array<double, 3>, 3> invert_system(
    const std::array<Direction, 3>& ks) {
    double m[3][3];
    for (int j = 0; j < 3; ++j) {
        const double kx = ks[j].x(), ky = ks[j].y();
        m[0][j] = 2.0 * kx * kx;
        m[1][j] = 2.0 * kx * ky;
        m[2][j] = 2.0 * ky * ky;
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("DirectionFamily: rank-one tensors do not span");
    std::array<std::array<double, 3>, 3> inv;
    auto cof = [&](int r, int c) {
        const int r1 = (r + 1) % 3, r2 = (r + 2) % 3;
        const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        return m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) inv[r][c] = cof(c, r) / det;
    return inv;
}

}  // namespace

DirectionFamily::DirectionFamily(int index)
    : index_(index), plus_(plus_set_for(index)), weights_(invert_system(plus_)) {}

std::array<Direction, 6> DirectionFamily::full_set() const {
    return {plus_[0], plus_[1], plus_[2], -plus_[0], -plus_[1], -plus_[2]};
}

std::array<double, 3> DirectionFamily::solve_coefficients(double r11, double r12,
                                                          double r22) const {
    std::array<double, 3> c;
    for (int i = 0; i < 3; ++i)
        c[i] = weights_[i][0] * r11 + weights_[i][1] * r12 + weights_[i][2] * r22;
    return c;
}

double geometric_constant_c0() {
    std::vector<Direction> all;
    for (int f : {0, 1})
        for (const auto& d : DirectionFamily(f).full_set()) all.push_back(d);
    double best = 1e9;
    for (const auto& a : all)
        for (const auto& b : all) {
            if (a.n1 + b.n1 == 0 && a.n2 + b.n2 == 0) continue;
            const double s = std::hypot(a.x() + b.x(), a.y() + b.y());
            best = std::min(best, s);
        }
    return 0.5 * best;
}

double measure_epsilon0(const DirectionFamily& family, int n_dirs) {
    // Deterministic directions on the Frobenius unit sphere of symmetric
    // matrices (R11, sqrt(2) R12, R22 coordinates).
    std::mt19937_64 rng(421);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::array<double, 3>> dirs;
    dirs.reserve(n_dirs);
    for (int i = 0; i < n_dirs; ++i) {
        double a = g(rng), b = g(rng), c = g(rng);
        const double r = std::sqrt(a * a + b * b + c * c);
        dirs.push_back({a / r, b / r / std::sqrt(2.0), c / r});
    }
    auto all_positive = [&](double radius) {
        for (const auto& d : dirs) {
            const auto c = family.solve_coefficients(1.0 + radius * d[0],
                                                     radius * d[1],
                                                     1.0 + radius * d[2]);
            for (double v : c)
                if (v <= 0.0) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 2.0;
    if (all_positive(hi)) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (all_positive(mid) ? lo : hi) = mid;
    }
    return lo;
}

GammaCoefficients gamma_coefficients(const std::array<double, 3>& r_sym,
                                     const DirectionFamily& family) {
    const auto c = family.solve_coefficients(r_sym[0], r_sym[1], r_sym[2]);
    GammaCoefficients out;
    for (int i = 0; i < 3; ++i) {
        if (c[i] <= 0.0) {
            std::ostringstream os;
            os << "gamma_coefficients: c[" << i << "] = " << c[i]
               << " not strictly positive (matrix outside admissible ball)";
            throw NonPositiveCoefficient(os.str());
        }
        out.gamma_sq[i] = c[i];
        out.gamma[i] = std::sqrt(c[i]);
    }
    return out;
}

double pair_pressure(const Direction& k, const Direction& kp) {
    return k.dot(kp) - 1.0;
}

StationaryFlow stationary_flow(
    const std::map<Direction, std::complex<double>>& coeffs, int lambda,
    Grid grid) {
    if (lambda <= 0) throw std::invalid_argument("stationary_flow: lambda <= 0");
    for (const auto& [k, a] : coeffs) {
        if (!k.integer_multiple(lambda))
            throw std::invalid_argument(
                "stationary_flow: lambda*k not in Z^2 (lambda must be a "
                "multiple of 5 for fifth-component directions)");
        auto it = coeffs.find(-k);
        if (it == coeffs.end() ||
            std::abs(it->second - std::conj(a)) > 1e-13 * (1.0 + std::abs(a)))
            throw std::invalid_argument(
                "stationary_flow: coefficients not conjugate-symmetric");
        auto [s1, s2] = k.scaled(lambda);
        if (std::max(std::abs(s1), std::abs(s2)) >= grid.n / 2)
            throw Unresolved("stationary_flow: grid does not resolve lambda*k");
    }
    SpectralField psi_hat(grid);
    for (const auto& [k, a] : coeffs) {
        auto [s1, s2] = k.scaled(lambda);
        if (s1 < 0) continue;  // implied by the Hermitian mirror of -k
        psi_hat.at(s1, s2) += a;
    }
    enforce_hermitian(psi_hat);
    ScalarField psi = ScalarField::from_spectral(psi_hat);
    VectorField2 w = grad_perp(psi);
    kernels::scale(w.u1.mutable_values(), 1.0 / lambda);
    kernels::scale(w.u2.mutable_values(), 1.0 / lambda);
    return {std::move(w), std::move(psi)};
}

SymTraceFreeTensor2Field anti_divergence(const VectorField2& v) {
    return anti_divergence_spectral(v.u1.spectral(), v.u2.spectral());
}

SymTraceFreeTensor2Field anti_divergence_spectral(const SpectralField& a,
                                                  const SpectralField& b) {
    const Grid g = a.grid;
    const int n = g.n;
    const int cols = n / 2 + 1;
    SpectralField t11(g), t12(g);
    const std::complex<double> I(0, 1);
    for (int iy = 0; iy < n; ++iy) {
        const int ky = signed_wavenumber(iy, n);
        for (int kx = 0; kx < cols; ++kx) {
            const std::size_t idx = std::size_t(iy) * cols + kx;
            if (kx == 0 && ky == 0) {
                t11.c[idx] = 0.0;
                t12.c[idx] = 0.0;
                continue;
            }
            const double k2 = double(kx) * kx + double(ky) * ky;
            const std::complex<double> va = a.c[idx], vb = b.c[idx];
            t11.c[idx] = -I / k2 * (va * double(kx) - vb * double(ky));
            t12.c[idx] = -I / k2 * (va * double(ky) + vb * double(kx));
        }
    }
    return {ScalarField::from_spectral(t11), ScalarField::from_spectral(t12)};
}

std::pair<double, double> antidiv_hs_bound_probe(const VectorField2& v,
                                                 double s) {
    if (s <= 0.0)
        throw std::invalid_argument("antidiv_hs_bound_probe: s must be > 0");
    return {sup_norm(anti_divergence(v)), hs_norm(v, s)};
}

DecayTable stationary_phase_probe(const ScalarField& a, const Direction& k,
                                  const std::vector<int>& lambdas) {
    DecayTable out;
    const SpectralField s = a.spectral();
    const int n = a.grid().n;
    for (int lam : lambdas) {
        auto [s1, s2] = k.scaled(lam);
        if (std::max(std::abs(s1), std::abs(s2)) >= n / 2)
            throw Unresolved("stationary_phase_probe: lambda*k unresolved");
        // integral of a e^{i lambda k.x} = (2pi)^2 * coefficient of a at
        // -lambda k.
        const int mx = -s1, my = -s2;
        const std::complex<double> c =
            mx >= 0 ? s.at(mx, my) : std::conj(s.at(-mx, -my));
        out.lambdas.push_back(double(lam));
        out.values.push_back(kTwoPi * kTwoPi * std::abs(c));
    }
    out.fitted_slope = out.lambdas.size() >= 2
                           ? loglog_slope(out.lambdas, out.values)
                           : 0.0;
    return out;
}

DecayTable antidiv_decay_probe(const ScalarField& a, const Direction& k,
                               const std::vector<int>& lambdas, double alpha) {
    DecayTable out;
    const Grid g = a.grid();
    for (int lam : lambdas) {
        auto [s1, s2] = k.scaled(lam);
        // v = (a cos(lambda k.x), a sin(lambda k.x))
        ScalarField ph_c(g), ph_s(g);
        {
            auto pc = ph_c.mutable_values();
            auto ps = ph_s.mutable_values();
            for (int iy = 0; iy < g.n; ++iy)
                for (int ix = 0; ix < g.n; ++ix) {
                    const double ph = kTwoPi * (double(s1) * ix + double(s2) * iy) / g.n;
                    pc[std::size_t(iy) * g.n + ix] = std::cos(ph);
                    ps[std::size_t(iy) * g.n + ix] = std::sin(ph);
                }
        }
        VectorField2 v(multiply_dealiased(a, ph_c), multiply_dealiased(a, ph_s));
        const SymTraceFreeTensor2Field t = anti_divergence(v);
        const double norm = alpha == 0.0
                                ? sup_norm(t)
                                : std::max(holder_norm(t.t11, 0, alpha),
                                           holder_norm(t.t12, 0, alpha));
        out.lambdas.push_back(double(lam));
        out.values.push_back(norm);
    }
    out.fitted_slope = out.lambdas.size() >= 2
                           ? loglog_slope(out.lambdas, out.values)
                           : 0.0;
    return out;
}

}  // namespace cib
