#include "cib/verification.hpp"

#include <cmath>

#include "cib/kernels.hpp"
#include "cib/serial_ref.hpp"

namespace cib {

ResidualReport residual_boussinesq_reynolds(const StageState& st, Grid eval,
                                            int stride) {
    const TimeGrid tg = st.v.tg;
    const int n_t = tg.n_t;
    ResidualReport rep;
    double l2_acc = 0.0;
    int counted = 0;
    const double mean0 = mean(st.theta.at(0));

    for (int j = 0; j < n_t; ++j) {
        if (j % stride != 0 && j != n_t - 1) continue;
        ++counted;

        // momentum: d_t v + div(v x v) + grad p - theta e2 - div R
        VectorField2 dtv = time_derivative4(st.v, j);
        VectorField2 res = resample(dtv, eval);
        const VectorField2 v = resample(st.v.at(j), eval);
        {
            ScalarField s11 = multiply_dealiased(v.u1, v.u1);
            ScalarField s12 = multiply_dealiased(v.u1, v.u2);
            ScalarField s22 = multiply_dealiased(v.u2, v.u2);
            add_in_place(res.u1, add(spectral_derivative(s11, 1, 0),
                                     spectral_derivative(s12, 0, 1)));
            add_in_place(res.u2, add(spectral_derivative(s12, 1, 0),
                                     spectral_derivative(s22, 0, 1)));
        }
        {
            const ScalarField p = resample(st.p.at(j), eval);
            VectorField2 gp = gradient(p);
            add_in_place(res.u1, gp.u1);
            add_in_place(res.u2, gp.u2);
        }
        {
            const ScalarField th = resample(st.theta.at(j), eval);
            add_in_place(res.u2, th, -1.0);
        }
        {
            VectorField2 divr = divergence_tensor(resample(st.r.at(j), eval));
            add_in_place(res.u1, divr.u1, -1.0);
            add_in_place(res.u2, divr.u2, -1.0);
        }
        rep.momentum_sup = std::max(rep.momentum_sup, sup_norm(res));
        const double l2 = l2_norm(res);
        l2_acc += l2 * l2;

        {
            const double dsup = sup_norm(divergence(v));
            const double scale = 1.0 + holder_seminorm(v, 1, 0.0);
            rep.divergence_rel = std::max(rep.divergence_rel, dsup / scale);
        }
        {
            // temperature: d_t theta + v . grad theta - lap theta
            ScalarField tres = resample(time_derivative4(st.theta, j), eval);
            const ScalarField th = resample(st.theta.at(j), eval);
            SpectralField th_hat = th.spectral();
            ScalarField tx = ScalarField::from_spectral(derivative(th_hat, 1, 0));
            ScalarField ty = ScalarField::from_spectral(derivative(th_hat, 0, 1));
            auto acc = tres.mutable_values();
            kernels::multiply_add(v.u1.values(), tx.values(), 1.0, acc);
            kernels::multiply_add(v.u2.values(), ty.values(), 1.0, acc);
            scale_by_symbol(th_hat, [](double k2) { return -k2; });
            add_in_place(tres, ScalarField::from_spectral(th_hat), -1.0);
            rep.temperature_sup = std::max(rep.temperature_sup, sup_norm(tres));
            rep.theta_mean_drift = std::max(rep.theta_mean_drift,
                                            std::abs(mean(th) - mean0));
        }
    }
    rep.momentum_l2 = std::sqrt(l2_acc / std::max(1, counted));
    return rep;
}

std::vector<EstimateRow> inductive_estimate_report(
    const StageState& prev, const StageState& next, const ParamSchedule& sched,
    const StageOutcome& outcome, const EnergyProfile& e) {
    std::vector<EstimateRow> rows;
    const int q = prev.q;
    const double d1 = sched.delta(q + 1);
    const double d2 = sched.delta(q + 2);
    const double l1 = sched.lambda(q + 1);
    const double M = outcome.measured_M;
    auto push = [&](const std::string& n, double lhs, double rhs,
                    bool comparable) {
        EstimateRow r;
        r.name = n;
        r.lhs = lhs;
        r.rhs = rhs;
        r.ratio = rhs > 0 ? lhs / rhs : 0.0;
        r.comparable = comparable;
        rows.push_back(r);
    };

    // stress smallness at the new stage
    double r_sup = 0.0, r_sup1 = 0.0;
    for (const auto& s : next.r.slices) {
        r_sup = std::max(r_sup, sup_norm(s));
        r_sup1 = std::max(r_sup1, std::max(cm_norm(s.t11, 1), cm_norm(s.t12, 1)));
    }
    push("stress sup <= eta delta_{q+2}", r_sup, outcome.eta * d2, true);
    push("stress C1 <= eta delta_{q+2} lambda_{q+1}", r_sup1,
         outcome.eta * d2 * l1, true);

    // velocity increment rows
    double dv_sup = 0.0, dv_c1 = 0.0;
    {
        const Grid g = next.v.at(0).grid();
        for (int j = 0; j < next.v.size(); ++j) {
            VectorField2 d = resample(prev.v.at(j), g);
            kernels::scale(d.u1.mutable_values(), -1.0);
            kernels::scale(d.u2.mutable_values(), -1.0);
            add_in_place(d.u1, next.v.at(j).u1);
            add_in_place(d.u2, next.v.at(j).u2);
            dv_sup = std::max(dv_sup, sup_norm(d));
            if (j % 8 == 0)
                dv_c1 = std::max(dv_c1, std::max(cm_norm(d.u1, 1),
                                                 cm_norm(d.u2, 1)));
        }
    }
    push("velocity increment sup <= M delta^{1/2}", dv_sup,
         M * std::sqrt(d1), true);
    push("velocity increment C1 / (delta^{1/2} lambda)",
         dv_c1, std::sqrt(d1) * l1, false);

    // pressure increment rows
    double dp_sup = 0.0;
    {
        const Grid g = next.p.at(0).grid();
        for (int j = 0; j < next.p.size(); ++j) {
            ScalarField d = resample(prev.p.at(j), g);
            kernels::scale(d.mutable_values(), -1.0);
            add_in_place(d, next.p.at(j));
            dp_sup = std::max(dp_sup, sup_norm(d));
        }
    }
    push("pressure increment sup <= M^2 delta", dp_sup, M * M * d1, true);

    // temperature energy identity drift and increment bound
    {
        auto ledger = theta_energy_ledger(next.theta);
        double drift = 0.0;
        for (double v : ledger) drift = std::max(drift, std::abs(v - ledger[0]));
        push("temperature energy identity drift", drift, 1e-7, true);
    }
    push("temperature increment energy <= 4 M^2 |theta0|^2 delta",
         outcome.theta_inc_lhs,
         4.0 * M * M * std::pow(sup_norm(prev.theta.at(0)), 2) * d1, true);

    // prescribed-energy gap at the new stage
    push("energy gap (next) <= delta_{q+2} e / 4",
         outcome.gap_next.max_abs_normalized, outcome.gap_next.bound, true);
    push("energy gap vs step budget shape",
         outcome.gap_next.max_abs_normalized * e.min_value(),
         outcome.gap_budget, false);

    // time-derivative growth of the increment
    push("d_t increment sup / (delta^{1/2} lambda)", outcome.stress.dt_w_sup,
         std::sqrt(d1) * l1, false);
    return rows;
}

ProbeSuiteResult scaling_probe_suite() {
    ProbeSuiteResult r;
    {
        Grid g(256);
        ScalarField a = ScalarField::from_function(g, [](double x, double y) {
            return std::exp(std::cos(x)) * (1.0 + 0.5 * std::sin(y));
        });
        a = band_truncate(a, g.dealias_cut());
        r.antidiv_slope_a0 =
            antidiv_decay_probe(a, {5, 0}, {8, 16, 32, 64}, 0.0).fitted_slope;
        r.antidiv_slope_a3 =
            antidiv_decay_probe(a, {5, 0}, {8, 16, 32, 64}, 0.3).fitted_slope;
        r.pass_antidiv = r.antidiv_slope_a0 <= -1.0 + 0.15 &&
                         r.antidiv_slope_a3 <= -0.7 + 0.15;
    }
    {
        auto res =
            forced_transport_decay_probe(Grid(256), {10, 20, 40, 80}, 400.0,
                                         0.01);
        r.forced_theta_slope = res.fitted_slope;
        r.pass_forced = res.fitted_slope <= -1.0 + 0.15 &&
                        res.fitted_slope >= -1.0 - 0.15;
    }
    {
        Grid g(256);
        ScalarField bump = ScalarField::from_function(g, [](double x, double y) {
            const double dx = x - M_PI, dy = y - M_PI;
            return std::exp(-2.0 * (dx * dx + dy * dy));
        });
        bump = band_truncate(bump, g.dealias_cut());
        r.phase_slope_bump =
            stationary_phase_probe(bump, {5, 0}, {5, 10, 20, 40}).fitted_slope;

        // synthetic amplitude with algebraic spectral decay |c_k| ~ |k|^-4.5,
        // so the second derivatives are summable but barely
        SpectralField s(g);
        for (int ky = -60; ky <= 60; ++ky)
            for (int kx = 0; kx <= 60; ++kx) {
                if (kx == 0 && ky <= 0) continue;
                const double k = std::sqrt(double(kx) * kx + double(ky) * ky);
                const double mag = std::pow(1.0 + k, -4.5);
                const double ph = 2.399963 * (kx * 37 + ky * 17);
                s.at(kx, ky) =
                    std::complex<double>(std::cos(ph), std::sin(ph)) * mag;
            }
        enforce_hermitian(s);
        ScalarField c2 = ScalarField::from_spectral(s);
        r.phase_slope_c2 =
            stationary_phase_probe(c2, {5, 0}, {5, 10, 20, 40}).fitted_slope;
        r.pass_phase = r.phase_slope_bump <= -2.0 + 0.2 &&
                       r.phase_slope_c2 <= -2.0 + 0.2;
    }
    return r;
}

std::vector<HolderRow> holder_report(
    const std::vector<const StageState*>& states, const ParamSchedule& sched,
    double measured_M, const std::vector<double>& alphas) {
    std::vector<HolderRow> rows;
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        const StageState& a = *states[i];
        const StageState& b = *states[i + 1];
        const Grid g = b.v.at(0).grid();
        const int q = a.q;
        for (double alpha : alphas) {
            HolderRow row;
            row.q = q;
            row.alpha = alpha;
            double spat = 0.0;
            for (int j = 0; j < b.v.size(); j += 8) {
                VectorField2 d = resample(a.v.at(j), g);
                kernels::scale(d.u1.mutable_values(), -1.0);
                kernels::scale(d.u2.mutable_values(), -1.0);
                add_in_place(d.u1, b.v.at(j).u1);
                add_in_place(d.u2, b.v.at(j).u2);
                spat = std::max(spat, alpha == 0.0
                                          ? sup_norm(d)
                                          : holder_seminorm(d, 0, alpha));
            }
            row.spatial_increment = spat;
            // temporal quotient on a few separations
            double temporal = 0.0;
            const double dt = b.v.tg.dt();
            for (int sep : {1, 2, 4, 8, 16}) {
                if (sep >= b.v.size()) break;
                for (int j = 0; j + sep < b.v.size(); j += 16) {
                    VectorField2 d = b.v.at(j + sep);
                    VectorField2 d0 = resample(a.v.at(j + sep), g);
                    kernels::axpy(-1.0, d0.u1.values(), d.u1.mutable_values());
                    kernels::axpy(-1.0, d0.u2.values(), d.u2.mutable_values());
                    VectorField2 dj = b.v.at(j);
                    VectorField2 dj0 = resample(a.v.at(j), g);
                    kernels::axpy(-1.0, dj0.u1.values(), dj.u1.mutable_values());
                    kernels::axpy(-1.0, dj0.u2.values(), dj.u2.mutable_values());
                    kernels::axpy(-1.0, dj.u1.values(), d.u1.mutable_values());
                    kernels::axpy(-1.0, dj.u2.values(), d.u2.mutable_values());
                    temporal = std::max(
                        temporal,
                        sup_norm(d) / std::pow(sep * dt, alpha));
                }
            }
            row.temporal_increment = temporal;
            const double d1 = sched.delta(q + 1);
            const double l1 = sched.lambda(q + 1);
            row.interp_bound =
                measured_M * std::sqrt(d1) * std::pow(l1, alpha);
            row.schedule_bound =
                2.0 * measured_M *
                std::pow(sched.a, (-0.5 + alpha * sched.b() * sched.c()) *
                                      std::pow(sched.b(), q + 1));
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace cib
