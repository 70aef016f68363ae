#include "cib/stress_assembly.hpp"

#include <cmath>
#include <map>

#include "cib/kernels.hpp"

namespace cib {

namespace {

VectorField2 div_sym_general(const ScalarField& s11, const ScalarField& s12,
                             const ScalarField& s22) {
    return {add(spectral_derivative(s11, 1, 0), spectral_derivative(s12, 0, 1)),
            add(spectral_derivative(s12, 1, 0), spectral_derivative(s22, 0, 1))};
}

/// (u . grad) f for vector f, dealiased products on f's grid.
VectorField2 advect(const VectorField2& u, const VectorField2& f) {
    const SpectralField f1 = f.u1.spectral();
    const SpectralField f2 = f.u2.spectral();
    ScalarField f1x = ScalarField::from_spectral(derivative(f1, 1, 0));
    ScalarField f1y = ScalarField::from_spectral(derivative(f1, 0, 1));
    ScalarField f2x = ScalarField::from_spectral(derivative(f2, 1, 0));
    ScalarField f2y = ScalarField::from_spectral(derivative(f2, 0, 1));
    VectorField2 out(f.grid());
    auto o1 = out.u1.mutable_values();
    auto o2 = out.u2.mutable_values();
    kernels::multiply_add(u.u1.values(), f1x.values(), 1.0, o1);
    kernels::multiply_add(u.u2.values(), f1y.values(), 1.0, o1);
    kernels::multiply_add(u.u1.values(), f2x.values(), 1.0, o2);
    kernels::multiply_add(u.u2.values(), f2y.values(), 1.0, o2);
    return out;
}

struct TermTracker {
    TermReport rep;
    void observe(const SymTraceFreeTensor2Field& t, bool with_c1) {
        rep.sup0 = std::max(rep.sup0, sup_norm(t));
        if (with_c1)
            rep.sup1 = std::max(
                rep.sup1, std::max(cm_norm(t.t11, 1), cm_norm(t.t12, 1)));
    }
    void finish(const std::string& name, double bound) {
        rep.name = name;
        rep.bound = bound;
        rep.ratio = bound > 0 ? rep.sup0 / bound : 0.0;
    }
};

}  // namespace

StressResult assemble_stress(PerturbationAssembler& pa, const StressInputs& in,
                             const BoundShapes& shapes,
                             const StressOptions& opt) {
    const TimeGrid tg = in.v->tg;
    const int n_t = tg.n_t;
    const Grid g = pa.geometry().eval_grid;
    const int kcut = pa.geometry().kcut;
    const Grid store = opt.store_n > 0 ? Grid(opt.store_n) : g;

    StressResult res;
    res.r_new = TimeSeries<SymTraceFreeTensor2Field>(tg);
    res.p_new = TimeSeries<ScalarField>(tg);
    res.v_new = TimeSeries<VectorField2>(tg);

    // perturbation ring, band-limited to the stored cut so the transport
    // term differentiates exactly what the verification will see
    std::map<int, VectorField2> ring;
    auto w_at = [&](int j) -> const VectorField2& {
        auto it = ring.find(j);
        if (it == ring.end()) {
            VectorField2 w = pa.w_slice(j);
            SpectralField s1 = w.u1.spectral();
            SpectralField s2 = w.u2.spectral();
            truncate(s1, kcut);
            truncate(s2, kcut);
            it = ring.emplace(j, VectorField2(ScalarField::from_spectral(s1),
                                              ScalarField::from_spectral(s2)))
                     .first;
        }
        return it->second;
    };

    std::array<TermTracker, 7> track;
    TermTracker track_p;
    double trace_worst = 0.0;

    for (int j = 0; j < n_t; ++j) {
        if (opt.progress) opt.progress(j, n_t);
        const bool heavy = (j % 8 == 0) || j == n_t - 1;

        const int center = std::clamp(j, 2, n_t - 3);
        for (int m = center - 2; m <= center + 2; ++m) w_at(m);
        while (!ring.empty() && ring.begin()->first < center - 2)
            ring.erase(ring.begin());

        const VectorField2& w_j = w_at(j);
        const VectorField2 v_ell_j = resample(in.v_ell->at(j), g);

        // transport derivative: the same 4th-order stencils the
        // verification uses, then R(d_t w + v_ell . grad w)
        VectorField2 dtw(g);
        {
            const auto fw = fd5_weights(j - (center - 2));
            auto a1 = dtw.u1.mutable_values();
            auto a2 = dtw.u2.mutable_values();
            const double inv_dt = 1.0 / tg.dt();
            for (int m = 0; m < 5; ++m) {
                const VectorField2& s = w_at(center - 2 + m);
                kernels::axpy(fw[m] * inv_dt, s.u1.values(), a1);
                kernels::axpy(fw[m] * inv_dt, s.u2.values(), a2);
            }
            res.dt_w_sup = std::max(res.dt_w_sup, sup_norm(dtw));
        }
        {
            VectorField2 adv = advect(v_ell_j, w_j);
            kernels::axpy(1.0, adv.u1.values(), dtw.u1.mutable_values());
            kernels::axpy(1.0, adv.u2.values(), dtw.u2.mutable_values());
        }
        SymTraceFreeTensor2Field r_acc = anti_divergence(dtw);
        track[0].observe(r_acc, heavy);

        {
            // R(w . grad v_ell)
            VectorField2 adv = advect(w_j, v_ell_j);
            SymTraceFreeTensor2Field t = anti_divergence(adv);
            track[1].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
        }
        {
            // -R((theta1 - theta) e2)
            ScalarField dth = resample(in.theta1->at(j), g);
            add_in_place(dth, resample(in.theta->at(j), g), -1.0);
            SymTraceFreeTensor2Field t =
                anti_divergence({ScalarField(g, 0.0), std::move(dth)});
            kernels::scale(t.t11.mutable_values(), -1.0);
            kernels::scale(t.t12.mutable_values(), -1.0);
            track[2].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
        }
        VectorField2 wo = pa.w_o_slice(j);
        ScalarField pr = band_truncate(pa.pressure_slice(j), kcut);
        {
            // R(T1 + T2) and, on request, the dual-evaluation cross-check;
            // the pointwise chart sums carry band content the dealiased
            // products cannot, so both the stress input and the identity
            // comparison live in the kept band
            VectorField2 tosc_raw = pa.osc_slice(j);
            SpectralField tosc1 = tosc_raw.u1.spectral();
            SpectralField tosc2 = tosc_raw.u2.spectral();
            truncate(tosc1, kcut);
            truncate(tosc2, kcut);
            if (opt.crosscheck && j % opt.crosscheck_stride == 0) {
                ScalarField s11 = multiply_dealiased(wo.u1, wo.u1);
                ScalarField s12 = multiply_dealiased(wo.u1, wo.u2);
                ScalarField s22 = multiply_dealiased(wo.u2, wo.u2);
                const SymTraceFreeTensor2Field r_ell_up =
                    resample(in.r_ell->at(j), g);
                add_in_place(s11, r_ell_up.t11, 1.0);
                add_in_place(s12, r_ell_up.t12, 1.0);
                add_in_place(s22, r_ell_up.t11, -1.0);
                add_in_place(s11, pr, 1.0);
                add_in_place(s22, pr, 1.0);
                // lhs in the kept band, assembled spectrally
                SpectralField h11 = s11.spectral();
                SpectralField h12 = s12.spectral();
                SpectralField h22 = s22.spectral();
                SpectralField l1 = derivative(h11, 1, 0);
                {
                    const SpectralField b = derivative(h12, 0, 1);
                    for (std::size_t i = 0; i < l1.c.size(); ++i)
                        l1.c[i] += b.c[i];
                }
                SpectralField l2 = derivative(h12, 1, 0);
                {
                    const SpectralField b = derivative(h22, 0, 1);
                    for (std::size_t i = 0; i < l2.c.size(); ++i)
                        l2.c[i] += b.c[i];
                }
                truncate(l1, kcut);
                truncate(l2, kcut);
                for (std::size_t i = 0; i < l1.c.size(); ++i) {
                    l1.c[i] -= tosc1.c[i];
                    l2.c[i] -= tosc2.c[i];
                }
                const double worst =
                    std::max(sup_norm(ScalarField::from_spectral(l1)),
                             sup_norm(ScalarField::from_spectral(l2)));
                res.osc_crosscheck = std::max(res.osc_crosscheck, worst);
            }
            SymTraceFreeTensor2Field t = anti_divergence_spectral(tosc1, tosc2);
            track[3].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
        }
        VectorField2 wc = w_j;
        {
            kernels::axpy(-1.0, wo.u1.values(), wc.u1.mutable_values());
            kernels::axpy(-1.0, wo.u2.values(), wc.u2.mutable_values());
            res.w_o_sup = std::max(res.w_o_sup, sup_norm(wo));
            res.w_c_sup = std::max(res.w_c_sup, sup_norm(wc));
            res.w_sup = std::max(res.w_sup, sup_norm(w_j));
        }
        ScalarField p1 = resample(in.p->at(j), g);
        add_in_place(p1, pr, 1.0);
        {
            // quadratic corrector term: trace-free part of
            // wo x wc + wc x wo + wc x wc; half the trace goes into p1
            SymTraceFreeTensor2Field t(g);
            ScalarField half_tr(g);
            auto t11 = t.t11.mutable_values();
            auto t12 = t.t12.mutable_values();
            auto htr = half_tr.mutable_values();
            const auto a1 = wo.u1.values(), a2 = wo.u2.values();
            const auto b1 = wc.u1.values(), b2 = wc.u2.values();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(g.size()); ++i) {
                const double s11 = 2 * a1[i] * b1[i] + b1[i] * b1[i];
                const double s22 = 2 * a2[i] * b2[i] + b2[i] * b2[i];
                const double s12 =
                    a1[i] * b2[i] + a2[i] * b1[i] + b1[i] * b2[i];
                t11[i] = 0.5 * (s11 - s22);
                t12[i] = s12;
                htr[i] = 0.5 * (s11 + s22);
            }
            if (heavy) {
                double worst = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double tr = (2 * a1[i] * b1[i] + b1[i] * b1[i]) +
                                      (2 * a2[i] * b2[i] + b2[i] * b2[i]) -
                                      2.0 * htr[i];
                    worst = std::max(worst, std::abs(tr));
                }
                trace_worst = std::max(trace_worst, worst);
            }
            track[4].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
            add_in_place(p1, half_tr, -1.0);
        }
        const VectorField2 v_j = resample(in.v->at(j), g);
        {
            // mollification gap term: w x d + d x w - (d . w) Id with
            // d = v - v_ell; the Id part moves into p1
            VectorField2 d = v_j;
            kernels::axpy(-1.0, v_ell_j.u1.values(), d.u1.mutable_values());
            kernels::axpy(-1.0, v_ell_j.u2.values(), d.u2.mutable_values());
            SymTraceFreeTensor2Field t(g);
            ScalarField dw(g);
            auto t11 = t.t11.mutable_values();
            auto t12 = t.t12.mutable_values();
            auto dwv = dw.mutable_values();
            const auto a1 = w_j.u1.values(), a2 = w_j.u2.values();
            const auto b1 = d.u1.values(), b2 = d.u2.values();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(g.size()); ++i) {
                t11[i] = a1[i] * b1[i] - a2[i] * b2[i];
                t12[i] = a1[i] * b2[i] + a2[i] * b1[i];
                dwv[i] = a1[i] * b1[i] + a2[i] * b2[i];
            }
            track[5].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
            add_in_place(p1, dw, -1.0);
        }
        {
            // mollification deficit of the stress itself
            SymTraceFreeTensor2Field t = resample(in.r->at(j), g);
            const SymTraceFreeTensor2Field r_ell_up =
                resample(in.r_ell->at(j), g);
            add_in_place(t.t11, r_ell_up.t11, -1.0);
            add_in_place(t.t12, r_ell_up.t12, -1.0);
            track[6].observe(t, heavy);
            add_in_place(r_acc.t11, t.t11);
            add_in_place(r_acc.t12, t.t12);
        }
        track_p.rep.sup0 = std::max(track_p.rep.sup0, sup_norm(pr));

        if (heavy) {
            VectorField2 wl = pa.w_from_L_slice(j);
            VectorField2 wraw = pa.w_slice(j);
            ScalarField d1 = add(wl.u1, wraw.u1, -1.0);
            ScalarField d2 = add(wl.u2, wraw.u2, -1.0);
            res.w_l_residual = std::max(
                res.w_l_residual, std::max(sup_norm(d1), sup_norm(d2)));
            const double dsup = sup_norm(divergence(wraw));
            res.div_w_rel = std::max(
                res.div_w_rel,
                dsup / (pa.geometry().lambda * std::max(res.w_sup, 1e-30)));
        }

        VectorField2 v1 = v_j;
        kernels::axpy(1.0, w_j.u1.values(), v1.u1.mutable_values());
        kernels::axpy(1.0, w_j.u2.values(), v1.u2.mutable_values());
        auto store_scalar = [&](ScalarField& f) {
            SpectralField s = f.spectral();
            truncate(s, kcut);
            return ScalarField::from_spectral(store == g ? s
                                                         : resample(s, store));
        };
        res.v_new.slices.emplace_back(store_scalar(v1.u1),
                                      store_scalar(v1.u2));
        res.p_new.slices.push_back(store_scalar(p1));
        res.r_new.slices.emplace_back(store_scalar(r_acc.t11),
                                      store_scalar(r_acc.t12));
    }

    static const char* names[7] = {"R0_transport",  "R1_gradient",
                                   "R2_buoyancy",   "R3_oscillatory",
                                   "R4_corrector",  "R5_mollify_gap",
                                   "R6_stress_gap"};
    const double bounds[7] = {shapes.r0, shapes.r1, shapes.r2, shapes.r3,
                              shapes.r4, shapes.r5, shapes.r6};
    for (int i = 0; i < 7; ++i) {
        track[i].finish(names[i], bounds[i]);
        track[i].rep.max_trace = (i == 4 || i == 5) ? trace_worst : 0.0;
        res.terms.push_back(track[i].rep);
    }
    track_p.finish("P_pressure", shapes.pressure);
    res.terms.push_back(track_p.rep);
    return res;
}

double transport_term_dual_check(PerturbationAssembler& pa,
                                 const TimeSeries<VectorField2>& v_ell,
                                 int j) {
    const Grid g = pa.geometry().eval_grid;
    const TimeGrid tg = v_ell.tg;
    const double inv_lam = 1.0 / pa.geometry().lambda;
    const int n_t = tg.n_t;
    const int center = std::clamp(j, 2, n_t - 3);
    const auto fw = fd5_weights(j - (center - 2));
    const double inv_dt = 1.0 / tg.dt();
    const VectorField2 v_ell_j = resample(v_ell.at(j), g);

    // route A: finite differences of w plus advection
    VectorField2 route_a(g);
    {
        auto a1 = route_a.u1.mutable_values();
        auto a2 = route_a.u2.mutable_values();
        for (int m = 0; m < 5; ++m) {
            VectorField2 w = pa.w_slice(center - 2 + m);
            kernels::axpy(fw[m] * inv_dt, w.u1.values(), a1);
            kernels::axpy(fw[m] * inv_dt, w.u2.values(), a2);
        }
        VectorField2 adv = advect(v_ell_j, pa.w_slice(j));
        kernels::axpy(1.0, adv.u1.values(), a1);
        kernels::axpy(1.0, adv.u2.values(), a2);
    }

    // route B: sum over charts of (chi' L + chi D_t L) phi e; the phase
    // transport cancels identically along the flow
    VectorField2 route_b(g);
    const double t = tg.time(j);
    auto L_fields = [&](const ChartSlice& cs, int k) {
        std::array<ScalarField, 4> L{ScalarField(g), ScalarField(g),
                                     ScalarField(g), ScalarField(g)};
        const auto& ks = cs.family->plus_set();
        const double kx = ks[k].x(), ky = ks[k].y();
        const double kpx = ks[k].perp().x(), kpy = ks[k].perp().y();
        const auto a = cs.amp.a[k].values();
        const auto ax = cs.amp.grad_a[k].u1.values();
        const auto ay = cs.amp.grad_a[k].u2.values();
        const auto dx1 = cs.grad_disp[0].values();
        const auto dy1 = cs.grad_disp[1].values();
        const auto dx2 = cs.grad_disp[2].values();
        const auto dy2 = cs.grad_disp[3].values();
        auto re1 = L[0].mutable_values();
        auto im1 = L[1].mutable_values();
        auto re2 = L[2].mutable_values();
        auto im2 = L[3].mutable_values();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double pdx = kpx * dx1[i] + kpy * dx2[i];
            const double pdy = kpx * dy1[i] + kpy * dy2[i];
            re1[i] = ay[i] * inv_lam;
            im1[i] = a[i] * (kx + pdy);
            re2[i] = -ax[i] * inv_lam;
            im2[i] = a[i] * (ky - pdx);
        }
        return L;
    };

    for (int l : pa.partition().active_charts(t)) {
        auto cs = pa.chart_slice(l, j);
        for (int k = 0; k < 3; ++k) {
            std::array<ScalarField, 4> dtL{ScalarField(g), ScalarField(g),
                                           ScalarField(g), ScalarField(g)};
            for (int m = 0; m < 5; ++m) {
                auto cs_m = pa.chart_slice(l, center - 2 + m);
                auto Lm = L_fields(*cs_m, k);
                for (int c = 0; c < 4; ++c)
                    kernels::axpy(fw[m] * inv_dt, Lm[c].values(),
                                  dtL[c].mutable_values());
            }
            auto Lj = L_fields(*cs, k);
            for (int c = 0; c < 4; ++c) {
                ScalarField gx = spectral_derivative(Lj[c], 1, 0);
                ScalarField gy = spectral_derivative(Lj[c], 0, 1);
                auto acc = dtL[c].mutable_values();
                kernels::multiply_add(v_ell_j.u1.values(), gx.values(), 1.0,
                                      acc);
                kernels::multiply_add(v_ell_j.u2.values(), gy.values(), 1.0,
                                      acc);
            }
            const auto re = cs->mode[k].re.values();
            const auto im = cs->mode[k].im.values();
            auto o1 = route_b.u1.mutable_values();
            auto o2 = route_b.u2.mutable_values();
            const auto Lre1 = Lj[0].values(), Lim1 = Lj[1].values();
            const auto Lre2 = Lj[2].values(), Lim2 = Lj[3].values();
            const auto Dre1 = dtL[0].values(), Dim1 = dtL[1].values();
            const auto Dre2 = dtL[2].values(), Dim2 = dtL[3].values();
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double pr1 = cs->dchi * Lre1[i] + cs->chi * Dre1[i];
                const double pi1 = cs->dchi * Lim1[i] + cs->chi * Dim1[i];
                const double pr2 = cs->dchi * Lre2[i] + cs->chi * Dre2[i];
                const double pi2 = cs->dchi * Lim2[i] + cs->chi * Dim2[i];
                o1[i] += 2.0 * (pr1 * re[i] - pi1 * im[i]);
                o2[i] += 2.0 * (pr2 * re[i] - pi2 * im[i]);
            }
        }
    }

    ScalarField d1 = add(route_a.u1, route_b.u1, -1.0);
    ScalarField d2 = add(route_a.u2, route_b.u2, -1.0);
    return std::max(sup_norm(d1), sup_norm(d2));
}

}  // namespace cib
