#include <cmath>
#include <random>

#include "cib/building_blocks.hpp"
#include "cib/serial_ref.hpp"
#include "cib/util.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cib;
using cib::testing::max_abs_diff;
using cib::testing::random_band_limited;

namespace {

/// Independent 3x3 solve (partial-pivot elimination) for the
/// reconstruction oracle; shares nothing with DirectionFamily's inverse.
std::array<double, 3> solve3_oracle(const DirectionFamily& fam, double r11,
                                    double r12, double r22) {
    double m[3][4];
    for (int j = 0; j < 3; ++j) {
        const double kx = fam.plus_set()[j].x(), ky = fam.plus_set()[j].y();
        m[0][j] = 2 * kx * kx;
        m[1][j] = 2 * kx * ky;
        m[2][j] = 2 * ky * ky;
    }
    m[0][3] = r11;
    m[1][3] = r12;
    m[2][3] = r22;
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

std::array<double, 3> reconstruct(const DirectionFamily& fam,
                                  const std::array<double, 3>& c) {
    double r11 = 0, r12 = 0, r22 = 0;
    for (int j = 0; j < 3; ++j) {
        const double kx = fam.plus_set()[j].x(), ky = fam.plus_set()[j].y();
        r11 += 2 * c[j] * kx * kx;
        r12 += 2 * c[j] * kx * ky;
        r22 += 2 * c[j] * ky * ky;
    }
    return {r11, r12, r22};
}

}  // namespace

TEST_CASE("direction family invariants") {
    for (int idx : {0, 1}) {
        DirectionFamily fam(idx);
        for (const auto& k : fam.plus_set()) {
            // rational with denominator dividing 5, unit euclidean norm
            CHECK(k.n1 * k.n1 + k.n2 * k.n2 == 25);
        }
        auto full = fam.full_set();
        for (const auto& k : full) {
            bool has_neg = false;
            for (const auto& m : full)
                if (m == -k) has_neg = true;
            CHECK(has_neg);
        }
        // spanning: the 3x3 solve must reproduce arbitrary symmetric input
        std::mt19937_64 rng(7 + idx);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int t = 0; t < 50; ++t) {
            std::array<double, 3> r{u(rng), u(rng), u(rng)};
            auto c = fam.solve_coefficients(r[0], r[1], r[2]);
            auto back = reconstruct(fam, c);
            for (int j = 0; j < 3; ++j) CHECK(std::abs(back[j] - r[j]) <= 1e-12);
        }
    }
}

TEST_CASE("families are disjoint and c0 matches the stored value") {
    DirectionFamily f0(0), f1(1);
    for (const auto& a : f0.full_set())
        for (const auto& b : f1.full_set()) CHECK(!(a == b));
    // computed once here as the independent check of the constant
    const double c0 = geometric_constant_c0();
    CHECK(c0 == doctest::Approx(std::sqrt(2.0) / 10.0).epsilon(1e-12));
}

TEST_CASE("gamma coefficients at the identity") {
    DirectionFamily fam(0);
    auto gc = gamma_coefficients({1.0, 0.0, 1.0}, fam);
    CHECK(std::abs(gc.gamma_sq[0] - 7.0 / 32.0) <= 1e-14);
    CHECK(std::abs(gc.gamma_sq[1] - 25.0 / 64.0) <= 1e-14);
    CHECK(std::abs(gc.gamma_sq[2] - 25.0 / 64.0) <= 1e-14);

    // rotational symmetry: family 1 at Id gives the same coefficients
    DirectionFamily fam1(1);
    auto gc1 = gamma_coefficients({1.0, 0.0, 1.0}, fam1);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(gc1.gamma_sq[j] - gc.gamma_sq[j]) <= 1e-14);
}

TEST_CASE("gamma boundary case is rejected") {
    // R = 2 e1 x e1: coefficient of e1 is 1, the others 0 -> not strictly
    // positive
    DirectionFamily fam(0);
    CHECK_THROWS_AS(gamma_coefficients({2.0, 0.0, 0.0}, fam),
                    NonPositiveCoefficient);
}

TEST_CASE("gamma reconstruction on a sampled ball") {
    DirectionFamily fam(0);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gdist(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        double d11 = gdist(rng), d12 = gdist(rng), d22 = gdist(rng);
        const double fro = std::sqrt(d11 * d11 + 2 * d12 * d12 + d22 * d22);
        const double radius = 0.1;
        d11 *= radius / fro;
        d12 *= radius / fro;
        d22 *= radius / fro;
        auto gc = gamma_coefficients({1 + d11, d12, 1 + d22}, fam);
        auto back = reconstruct(fam, gc.gamma_sq);
        const double res = std::sqrt(std::pow(back[0] - (1 + d11), 2) +
                                     2 * std::pow(back[1] - d12, 2) +
                                     std::pow(back[2] - (1 + d22), 2));
        CHECK(res <= 1e-12);
        // cross-check against the independent elimination oracle
        auto oracle = solve3_oracle(fam, 1 + d11, d12, 1 + d22);
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(oracle[j] - gc.gamma_sq[j]) <= 1e-12);
    }
}

TEST_CASE("measured epsilon0 is positive and below the first blow-up") {
    DirectionFamily fam(0);
    const double eps0 = measure_epsilon0(fam, 256);
    CHECK(eps0 > 0.2);
    CHECK(eps0 < 1.0);
    // all coefficients stay positive strictly inside the reported radius
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gdist(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        double d11 = gdist(rng), d12 = gdist(rng), d22 = gdist(rng);
        const double fro = std::sqrt(d11 * d11 + 2 * d12 * d12 + d22 * d22);
        const double r = 0.9 * eps0 / fro;
        CHECK_NOTHROW(
            gamma_coefficients({1 + r * d11, r * d12, 1 + r * d22}, fam));
    }
}

TEST_CASE("pair pressure coefficient") {
    Direction e1{5, 0};
    Direction k2{3, 4};
    CHECK(pair_pressure(e1, e1) == doctest::Approx(0.0));
    CHECK(pair_pressure(e1, -e1) == doctest::Approx(-2.0));
    CHECK(pair_pressure(e1, k2) == doctest::Approx(-2.0 / 5.0));
}

TEST_CASE("stationary flow: single conjugate pair") {
    Grid g(32);
    std::map<Direction, std::complex<double>> coeffs;
    coeffs[{5, 0}] = 0.5;
    coeffs[{-5, 0}] = 0.5;
    auto flow = stationary_flow(coeffs, 1, g);
    ScalarField psi_expect = ScalarField::from_function(
        g, [](double x, double) { return std::cos(x); });
    CHECK(max_abs_diff(flow.Psi, psi_expect) <= 1e-13);
    ScalarField w2_expect = ScalarField::from_function(
        g, [](double x, double) { return -std::sin(x); });
    CHECK(sup_norm(flow.W.u1) <= 1e-13);
    CHECK(max_abs_diff(flow.W.u2, w2_expect) <= 1e-13);
}

namespace {
/// div(W x W) - grad(|W|^2/2 + Psi^2/2), sup norm.
double stationary_identity_residual(const StationaryFlow& flow) {
    const Grid g = flow.W.grid();
    ScalarField w11 = multiply_dealiased(flow.W.u1, flow.W.u1);
    ScalarField w12 = multiply_dealiased(flow.W.u1, flow.W.u2);
    ScalarField w22 = multiply_dealiased(flow.W.u2, flow.W.u2);
    ScalarField div1 = add(spectral_derivative(w11, 1, 0),
                           spectral_derivative(w12, 0, 1));
    ScalarField div2 = add(spectral_derivative(w12, 1, 0),
                           spectral_derivative(w22, 0, 1));
    ScalarField q = add(w11, w22);  // |W|^2
    ScalarField psi2 = multiply_dealiased(flow.Psi, flow.Psi);
    add_in_place(q, psi2);
    ScalarField g1 = spectral_derivative(q, 1, 0);
    ScalarField g2 = spectral_derivative(q, 0, 1);
    double res = 0.0;
    auto d1 = div1.values(), d2 = div2.values();
    auto e1 = g1.values(), e2 = g2.values();
    for (std::size_t i = 0; i < d1.size(); ++i) {
        res = std::max(res, std::abs(d1[i] - 0.5 * e1[i]));
        res = std::max(res, std::abs(d2[i] - 0.5 * e2[i]));
    }
    return res;
}
}  // namespace

TEST_CASE("stationary flow: pressure identity, single pair") {
    Grid g(32);
    std::map<Direction, std::complex<double>> coeffs;
    coeffs[{5, 0}] = 0.5;
    coeffs[{-5, 0}] = 0.5;
    auto flow = stationary_flow(coeffs, 1, g);
    CHECK(stationary_identity_residual(flow) <= 1e-12);
}

TEST_CASE("stationary flow: empty coefficients give zero") {
    Grid g(16);
    auto flow = stationary_flow({}, 5, g);
    CHECK(sup_norm(flow.W) == 0.0);
    CHECK(sup_norm(flow.Psi) == 0.0);
}

TEST_CASE("stationary flow: mean of W x W") {
    Grid g(128);
    DirectionFamily fam(0);
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> u(-1, 1);
    std::map<Direction, std::complex<double>> coeffs;
    for (const auto& k : {Direction{5, 0}, Direction{3, 4}}) {
        const std::complex<double> a(u(rng), u(rng));
        coeffs[k] = a;
        coeffs[-k] = std::conj(a);
    }
    auto flow = stationary_flow(coeffs, 5, g);
    // mean(W x W) = sum |a_k|^2 (Id - k x k)
    double e11 = 0, e12 = 0, e22 = 0;
    for (const auto& [k, a] : coeffs) {
        const double m = std::norm(a);
        e11 += m * (1 - k.x() * k.x());
        e12 += m * (-k.x() * k.y());
        e22 += m * (1 - k.y() * k.y());
    }
    const double m11 = mean(multiply_dealiased(flow.W.u1, flow.W.u1));
    const double m12 = mean(multiply_dealiased(flow.W.u1, flow.W.u2));
    const double m22 = mean(multiply_dealiased(flow.W.u2, flow.W.u2));
    CHECK(std::abs(m11 - e11) <= 1e-12);
    CHECK(std::abs(m12 - e12) <= 1e-12);
    CHECK(std::abs(m22 - e22) <= 1e-12);
    CHECK(stationary_identity_residual(flow) <= 1e-11 * sup_norm(flow.W) *
                                                    sup_norm(flow.W));
}

TEST_CASE("stationary flow input validation") {
    Grid g(32);
    std::map<Direction, std::complex<double>> bad;
    bad[{5, 0}] = {0.5, 0.1};
    bad[{-5, 0}] = {0.5, 0.1};  // not conjugate
    CHECK_THROWS(stationary_flow(bad, 1, g));
    std::map<Direction, std::complex<double>> fifth;
    fifth[{3, 4}] = 0.5;
    fifth[{-3, -4}] = 0.5;
    CHECK_THROWS(stationary_flow(fifth, 3, g));   // 3*(3/5) not integer
    CHECK_NOTHROW(stationary_flow(fifth, 5, g));  // multiple of 5 fine
}

TEST_CASE("anti-divergence closed form") {
    Grid g(64);
    ScalarField v1 = ScalarField::from_function(
        g, [](double, double y) { return std::sin(y); });
    VectorField2 v(std::move(v1), ScalarField(g, 0.0));
    auto t = anti_divergence(v);
    ScalarField expect12 = ScalarField::from_function(
        g, [](double, double y) { return -std::cos(y); });
    CHECK(sup_norm(t.t11) <= 1e-13);
    CHECK(max_abs_diff(t.t12, expect12) <= 1e-13);
}

TEST_CASE("anti-divergence of a constant is zero") {
    Grid g(16);
    VectorField2 v(ScalarField(g, 2.0), ScalarField(g, -3.0));
    CHECK(sup_norm(anti_divergence(v)) <= 1e-14);
}

TEST_CASE("anti-divergence contract on random fields") {
    Grid g(64);
    for (std::uint64_t seed : {100, 101}) {
        ScalarField a = random_band_limited(g, 16, seed);
        ScalarField b = random_band_limited(g, 16, seed + 50);
        VectorField2 v(std::move(a), std::move(b));
        auto t = anti_divergence(v);
        CHECK(std::abs(mean(t.t11)) <= 1e-14);
        CHECK(std::abs(mean(t.t12)) <= 1e-14);
        VectorField2 d = divergence_tensor(t);
        const double m1 = mean(v.u1), m2 = mean(v.u2);
        // div T must equal v minus its mean
        ScalarField r1 = add(d.u1, v.u1, -1.0);
        ScalarField r2 = add(d.u2, v.u2, -1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < r1.values().size(); ++i) {
            worst = std::max(worst, std::abs(r1.values()[i] + m1));
            worst = std::max(worst, std::abs(r2.values()[i] + m2));
        }
        CHECK(worst <= 1e-11 * sup_norm(v));
    }
}

TEST_CASE("anti-divergence matches the direct mode-sum reference") {
    Grid g(16);
    ScalarField a = random_band_limited(g, 5, 77);
    ScalarField b = random_band_limited(g, 5, 78);
    VectorField2 v(std::move(a), std::move(b));
    auto fast = anti_divergence(v);
    auto slow = ref::anti_divergence_direct(v);
    CHECK(max_abs_diff(fast.t11, slow.t11) <= 1e-11);
    CHECK(max_abs_diff(fast.t12, slow.t12) <= 1e-11);
}

TEST_CASE("Hs bound probe") {
    Grid g(64);
    SUBCASE("zero field") {
        VectorField2 v(ScalarField(g, 0.0), ScalarField(g, 0.0));
        auto [lhs, rhs] = antidiv_hs_bound_probe(v, 1.0);
        CHECK(lhs == 0.0);
        CHECK(rhs == 0.0);
    }
    SUBCASE("closed form for (sin y, 0), s = 1") {
        ScalarField v1 = ScalarField::from_function(
            g, [](double, double y) { return std::sin(y); });
        VectorField2 v(std::move(v1), ScalarField(g, 0.0));
        auto [lhs, rhs] = antidiv_hs_bound_probe(v, 1.0);
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rhs == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
    SUBCASE("calibrated constant on random fields, s = 1/2") {
        for (std::uint64_t seed : {7, 8, 9, 10}) {
            ScalarField a = random_band_limited(g, 14, seed);
            ScalarField b = random_band_limited(g, 14, seed + 90);
            VectorField2 v(std::move(a), std::move(b));
            auto [lhs, rhs] = antidiv_hs_bound_probe(v, 0.5);
            CHECK(lhs <= 5.0 * rhs);
        }
    }
    SUBCASE("rejects s <= 0") {
        VectorField2 v(ScalarField(g, 0.0), ScalarField(g, 0.0));
        CHECK_THROWS(antidiv_hs_bound_probe(v, 0.0));
    }
}

TEST_CASE("anti-divergence oscillatory decay probe") {
    Grid g(256);
    // smooth band-limited bump-like amplitude
    ScalarField a = ScalarField::from_function(g, [](double x, double y) {
        return std::exp(std::cos(x)) * (1.0 + 0.5 * std::sin(y));
    });
    a = band_truncate(a, g.dealias_cut());
    for (double alpha : {0.0, 0.3}) {
        auto table = antidiv_decay_probe(a, {5, 0}, {8, 16, 32, 64}, alpha);
        CHECK(table.fitted_slope <= alpha - 1.0 + 0.15);
    }
}

TEST_CASE("stationary phase probe") {
    Grid g(256);
    SUBCASE("constant amplitude integrates to zero") {
        ScalarField a(g, 1.0);
        auto t = stationary_phase_probe(a, {5, 0}, {1, 2, 4});
        for (double v : t.values) CHECK(v <= 1e-14);
    }
    SUBCASE("orthogonal mode vanishes") {
        ScalarField a = ScalarField::from_function(
            g, [](double, double y) { return std::sin(y); });
        auto t = stationary_phase_probe(a, {5, 0}, {3});
        CHECK(t.values[0] <= 1e-14);
    }
    SUBCASE("gaussian-like bump decays fast, quadrature oracle agrees") {
        ScalarField a = ScalarField::from_function(g, [](double x, double y) {
            const double dx = x - M_PI, dy = y - M_PI;
            return std::exp(-2.0 * (dx * dx + dy * dy));
        });
        a = band_truncate(a, g.dealias_cut());
        auto t = stationary_phase_probe(a, {5, 0}, {5, 10, 20, 40});
        CHECK(t.fitted_slope <= -2.0 + 0.2);
        for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
            const int lam = int(t.lambdas[i]);
            const double oracle =
                ref::oscillatory_integral_quadrature(a, 5 * lam / 5, 0);
            CHECK(std::abs(t.values[i] - oracle) <=
                  1e-12 + 1e-10 * (t.values[i] + oracle));
        }
    }
}
