#include <cmath>

#include "cib/evolution.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cib;
using cib::testing::max_abs_diff;
using cib::testing::random_band_limited;

namespace {

TimeSeries<VectorField2> constant_velocity(Grid g, TimeGrid tg, double c1,
                                           double c2) {
    TimeSeries<VectorField2> v(tg);
    for (int j = 0; j < tg.n_t; ++j) {
        VectorField2 s(g);
        for (auto& x : s.u1.mutable_values()) x = c1;
        for (auto& x : s.u2.mutable_values()) x = c2;
        v.slices.push_back(std::move(s));
    }
    return v;
}

TimeSeries<VectorField2> steady_velocity(Grid g, TimeGrid tg,
                                         const VectorField2& f) {
    TimeSeries<VectorField2> v(tg);
    for (int j = 0; j < tg.n_t; ++j) v.slices.push_back(f);
    return v;
}

}  // namespace

TEST_CASE("time grid and interpolation") {
    TimeGrid tg(5);
    CHECK(tg.dt() == doctest::Approx(0.25));
    CHECK_THROWS(TimeGrid(1));
    Grid g(16);
    TimeSeries<ScalarField> s(tg);
    auto poly = [](double t) { return 1.0 + t - 2 * t * t + 0.5 * t * t * t; };
    for (int j = 0; j < 5; ++j)
        s.slices.push_back(ScalarField(g, poly(tg.time(j))));
    for (double t : {0.1, 0.33, 0.61, 0.9}) {
        ScalarField v = interp_cubic(s, t);
        CHECK(std::abs(v.values()[0] - poly(t)) <= 1e-13);
    }
}

TEST_CASE("time derivative is 4th order exact on quartics") {
    Grid g(16);
    TimeGrid tg(9);
    TimeSeries<ScalarField> s(tg);
    auto poly = [](double t) { return t * t * t * t - 2 * t * t * t + t; };
    auto dpoly = [](double t) { return 4 * t * t * t - 6 * t * t + 1; };
    for (int j = 0; j < 9; ++j)
        s.slices.push_back(ScalarField(g, poly(tg.time(j))));
    for (int j : {0, 1, 4, 7, 8}) {
        ScalarField d = time_derivative4(s, j);
        CHECK(std::abs(d.values()[0] - dpoly(tg.time(j))) <= 1e-10);
    }
}

TEST_CASE("inverse flow: zero velocity gives the identity") {
    Grid g(32);
    TimeGrid tg(33);
    auto v = constant_velocity(g, tg, 0.0, 0.0);
    FlowSolveOptions opt;
    opt.solve_grid = g;
    FlowMap fm = solve_inverse_flow(v, 1, 4, 0.1, 0.4, opt);
    for (const auto& d : fm.displacement) CHECK(sup_norm(d) <= 1e-13);
}

TEST_CASE("inverse flow: rigid translation is exact") {
    Grid g(32);
    TimeGrid tg(33);
    const double c1 = 0.7, c2 = -0.4;
    auto v = constant_velocity(g, tg, c1, c2);
    FlowSolveOptions opt;
    opt.solve_grid = g;
    const int l = 2, mu = 8;
    FlowMap fm = solve_inverse_flow(v, l, mu, 0.15, 0.35, opt);
    for (int j = fm.j_begin; j < fm.j_begin + int(fm.displacement.size());
         ++j) {
        const double tau = fm.tg.time(j) - fm.anchor;
        const auto& d = fm.disp(j);
        double worst = 0.0;
        for (double x : d.u1.values())
            worst = std::max(worst, std::abs(x + c1 * tau));
        for (double x : d.u2.values())
            worst = std::max(worst, std::abs(x + c2 * tau));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("inverse flow: shear matches the analytic displacement") {
    // v = (sin y, 0): characteristics keep y fixed, so
    // Phi(t,x) = (x1 - sin(x2)(t - anchor), x2) exactly.
    Grid g(64);
    TimeGrid tg(65);
    VectorField2 shear(g);
    shear.u1 = ScalarField::from_function(
        g, [](double, double y) { return std::sin(y); });
    auto v = steady_velocity(g, tg, shear);
    FlowSolveOptions opt;
    opt.solve_grid = g;
    const int l = 3, mu = 8;
    FlowMap fm =
        solve_inverse_flow(v, l, mu, l / 8.0 - 0.1, l / 8.0 + 0.1, opt);
    double worst = 0.0;
    for (int j = fm.j_begin; j < fm.j_begin + int(fm.displacement.size());
         ++j) {
        const double tau = fm.tg.time(j) - fm.anchor;
        const auto& d = fm.disp(j);
        ScalarField expect = ScalarField::from_function(
            g, [&](double, double y) { return -std::sin(y) * tau; });
        worst = std::max(worst, max_abs_diff(d.u1, expect));
        worst = std::max(worst, sup_norm(d.u2));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("inverse flow: anchor identity and positive jacobian") {
    Grid g(48);
    TimeGrid tg(65);
    VectorField2 w = cib::testing::random_divfree(g, 4, 5, 0.8);
    auto v = steady_velocity(g, tg, w);
    FlowSolveOptions opt;
    opt.solve_grid = g;
    const int l = 4, mu = 8;  // anchor 0.5 lands on a slice
    FlowMap fm = solve_inverse_flow(v, l, mu, 0.4, 0.6, opt);
    CHECK(sup_norm(fm.disp(int(std::round(0.5 / tg.dt())))) <= 1e-13);
    for (int j = fm.j_begin; j < fm.j_begin + int(fm.displacement.size());
         ++j) {
        const auto& d = fm.disp(j);
        ScalarField d11 = spectral_derivative(d.u1, 1, 0);
        ScalarField d12 = spectral_derivative(d.u1, 0, 1);
        ScalarField d21 = spectral_derivative(d.u2, 1, 0);
        ScalarField d22 = spectral_derivative(d.u2, 0, 1);
        double min_det = 1e9;
        for (std::size_t i = 0; i < d11.values().size(); ++i) {
            const double a = 1.0 + d11.values()[i], b = d12.values()[i];
            const double c = d21.values()[i], e = 1.0 + d22.values()[i];
            min_det = std::min(min_det, a * e - b * c);
        }
        CHECK(min_det > 0.0);
    }
}

TEST_CASE("inverse flow: 4th order in the step size") {
    Grid g(48);
    TimeGrid tg(129);
    VectorField2 w(g);
    w.u1 = ScalarField::from_function(
        g, [](double, double y) { return std::sin(y); });
    w.u2 = ScalarField::from_function(
        g, [](double x, double) { return 0.3 * std::sin(x); });
    auto v = steady_velocity(g, tg, w);
    FlowSolveOptions fine;
    fine.solve_grid = g;
    fine.forced_dt = 1.0 / 8192;
    const int l = 8, mu = 16;
    FlowMap ref = solve_inverse_flow(v, l, mu, 0.45, 0.55, fine);

    auto err_for = [&](double dt) {
        FlowSolveOptions o;
        o.solve_grid = g;
        o.forced_dt = dt;
        FlowMap fm = solve_inverse_flow(v, l, mu, 0.45, 0.55, o);
        double e = 0.0;
        for (int j = fm.j_begin;
             j < fm.j_begin + int(fm.displacement.size()); ++j) {
            e = std::max(e, max_abs_diff(fm.disp(j).u1, ref.disp(j).u1));
            e = std::max(e, max_abs_diff(fm.disp(j).u2, ref.disp(j).u2));
        }
        return e;
    };
    const double e1 = err_for(1.0 / 128);
    const double e2 = err_for(1.0 / 256);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("inverse flow: unstable forced dt is rejected") {
    Grid g(32);
    TimeGrid tg(17);
    VectorField2 w(g);
    w.u1 = ScalarField::from_function(
        g, [](double, double y) { return 3.0 * std::sin(y); });
    auto v = steady_velocity(g, tg, w);
    FlowSolveOptions opt;
    opt.solve_grid = g;
    opt.forced_dt = 0.2;  // dt * ||v||_1 = 0.2 * 6 > 1/4
    CHECK_THROWS_AS(solve_inverse_flow(v, 2, 4, 0.3, 0.7, opt), StepUnstable);
}

TEST_CASE("transport-diffusion: exact single-mode decay") {
    Grid g(32);
    TimeGrid tg(65);
    auto v = constant_velocity(g, tg, 0.0, 0.0);
    ScalarField th0 = ScalarField::from_function(
        g, [](double, double y) { return std::sin(y); });
    auto theta = solve_transport_diffusion(v, th0);
    double worst = 0.0;
    for (int j = 0; j < tg.n_t; ++j) {
        const double decay = std::exp(-tg.time(j));
        ScalarField expect = ScalarField::from_function(
            g, [&](double, double y) { return decay * std::sin(y); });
        worst = std::max(worst, max_abs_diff(theta.at(j), expect));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("transport-diffusion: x2-only initial data rides any x2-shear") {
    Grid g(64);
    TimeGrid tg(65);
    TimeSeries<VectorField2> v(tg);
    for (int j = 0; j < tg.n_t; ++j) {
        const double f = 1.5 + 0.5 * std::cos(kTwoPi * tg.time(j));
        VectorField2 s(g);
        s.u1 = ScalarField::from_function(
            g, [&](double, double y) { return f * std::sin(5 * y); });
        v.slices.push_back(std::move(s));
    }
    ScalarField th0 = ScalarField::from_function(g, [](double, double y) {
        return 0.7 * std::sin(y) - 0.2 * std::cos(y);
    });
    auto theta = solve_transport_diffusion(v, th0);
    double worst = 0.0;
    for (int j = 0; j < tg.n_t; ++j) {
        const double decay = std::exp(-tg.time(j));
        ScalarField expect =
            ScalarField::from_function(g, [&](double, double y) {
                return decay * (0.7 * std::sin(y) - 0.2 * std::cos(y));
            });
        worst = std::max(worst, max_abs_diff(theta.at(j), expect));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("transport-diffusion: forced solution matches the mode oracle") {
    // constant sweep velocity: each forced mode satisfies an independent
    // linear ODE with closed-form solution
    Grid g(64);
    const double U = 3.0;
    const int lam = 7;
    TimeGrid tg(129);
    auto v = constant_velocity(g, tg, U, 0.0);
    ScalarField f_space = ScalarField::from_function(
        g, [&](double x, double) { return std::cos(lam * x); });
    TransportDiffusionOptions opt;
    opt.min_substeps_per_slice = 4;
    auto theta = solve_transport_diffusion(
        v, ScalarField(g, 0.0), [&](double) { return f_space; }, opt);
    const double T = 1.0;
    const std::complex<double> z(lam * lam, U * lam);
    const std::complex<double> amp = 0.5 * (1.0 - std::exp(-z * T)) / z;
    const SpectralField s = theta.at(tg.n_t - 1).spectral();
    CHECK(std::abs(s.at(lam, 0) - amp) <= 1e-8);
}

TEST_CASE("transport-diffusion: mean preservation and maximum principle") {
    Grid g(48);
    TimeGrid tg(65);
    VectorField2 w = cib::testing::random_divfree(g, 5, 77, 1.0);
    auto v = steady_velocity(g, tg, w);
    ScalarField th0 = random_band_limited(g, 6, 13);
    auto theta = solve_transport_diffusion(v, th0);
    const double m0 = mean(th0);
    const double sup0 = sup_norm(th0);
    for (int j = 0; j < tg.n_t; ++j) {
        CHECK(std::abs(mean(theta.at(j)) - m0) <= 1e-12);
        CHECK(sup_norm(theta.at(j)) <= sup0 + 1e-8);
    }
}

TEST_CASE("theta energy ledger is flat") {
    Grid g(32);
    TimeGrid tg(129);
    SUBCASE("closed form: theta0 = sin(x2), v = 0") {
        auto v = constant_velocity(g, tg, 0.0, 0.0);
        ScalarField th0 = ScalarField::from_function(
            g, [](double, double y) { return std::sin(y); });
        auto theta = solve_transport_diffusion(v, th0);
        auto ledger = theta_energy_ledger(theta);
        const double pi2 = M_PI * M_PI;
        for (double v_j : ledger) CHECK(std::abs(v_j - pi2) <= 1e-8);
    }
    SUBCASE("zero data") {
        auto v = constant_velocity(g, tg, 0.0, 0.0);
        auto theta = solve_transport_diffusion(v, ScalarField(g, 0.0));
        for (double v_j : theta_energy_ledger(theta)) CHECK(v_j == 0.0);
    }
    SUBCASE("cos initial data on the x2-shear") {
        TimeSeries<VectorField2> v(tg);
        for (int j = 0; j < tg.n_t; ++j) {
            VectorField2 s(g);
            s.u1 = ScalarField::from_function(
                g, [](double, double y) { return std::sin(5 * y); });
            v.slices.push_back(std::move(s));
        }
        ScalarField th0 = ScalarField::from_function(
            g, [](double, double y) { return std::cos(y); });
        auto theta = solve_transport_diffusion(v, th0);
        auto ledger = theta_energy_ledger(theta);
        for (double v_j : ledger) CHECK(std::abs(v_j - M_PI * M_PI) <= 1e-8);
    }
}

TEST_CASE("transport estimates hold with the stated constants") {
    Grid g(32);
    TimeGrid tg(65);
    SUBCASE("g = 0, v = 0: sup norm constant") {
        auto v = constant_velocity(g, tg, 0.0, 0.0);
        ScalarField f0 = random_band_limited(g, 4, 3);
        auto rep = transport_estimate_probe(v, f0, nullptr, 0.5, 0.5);
        CHECK(rep.sup_ok);
        CHECK(rep.sup_lhs == doctest::Approx(sup_norm(f0)).epsilon(1e-10));
    }
    SUBCASE("constant v: norms time-invariant") {
        auto v = constant_velocity(g, tg, 1.0, 0.0);
        ScalarField f0 = ScalarField::from_function(
            g, [](double, double y) { return std::sin(y); });
        auto rep = transport_estimate_probe(v, f0, nullptr, 0.3, 0.4);
        CHECK(rep.sup_ok);
        CHECK(rep.holder_ok);
    }
    SUBCASE("smooth shear with forcing keeps the inequalities") {
        TimeSeries<VectorField2> v(tg);
        for (int j = 0; j < tg.n_t; ++j) {
            VectorField2 s(g);
            s.u1 = ScalarField::from_function(
                g, [](double, double y) { return 0.8 * std::sin(y); });
            v.slices.push_back(std::move(s));
        }
        ScalarField f0 = random_band_limited(g, 3, 8);
        ForcingFn gfun = [&](double t) {
            return ScalarField::from_function(g, [&](double x, double) {
                return 0.3 * std::cos(x) * std::cos(t);
            });
        };
        auto rep = transport_estimate_probe(v, f0, gfun, 0.4, 0.4);
        CHECK(rep.sup_ok);
        CHECK(rep.holder_ok);
        CHECK(rep.gradphi_constant > 0.0);
        CHECK(rep.gradphi_constant < 5.0);
    }
}

TEST_CASE("forced transport-diffusion decay probe") {
    Grid g(128);
    auto res = forced_transport_decay_probe(g, {10, 20, 40}, 400.0, 0.01);
    CHECK(res.fitted_slope <= -0.85);
    CHECK(res.fitted_slope >= -1.15);
}
