#include "cib/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cib/kernels.hpp"

namespace cib {

namespace {

int clamp_base(int j0, int n) { return std::clamp(j0 - 1, 0, n - 4); }

ScalarField combine_scalar(const std::vector<ScalarField>& slices,
                           const std::vector<std::pair<int, double>>& terms) {
    ScalarField out(slices[0].grid(), 0.0);
    auto acc = out.mutable_values();
    for (auto [j, w] : terms) kernels::axpy(w, slices[j].values(), acc);
    return out;
}

std::vector<std::pair<int, double>> interp_terms(int n, double u) {
    if (n < 4) {
        const int j = std::clamp(int(u), 0, n - 2);
        const double w1 = u - j;
        return {{j, 1.0 - w1}, {j + 1, w1}};
    }
    const int j0 = std::clamp(int(std::floor(u)), 0, n - 1);
    const int base = clamp_base(j0, n);
    const auto w = cubic_weights(u - (base + 1));
    return {{base, w[0]}, {base + 1, w[1]}, {base + 2, w[2]}, {base + 3, w[3]}};
}

}  // namespace

ScalarField interp_cubic(const TimeSeries<ScalarField>& s, double t) {
    const int n = s.size();
    if (n == 1) return s.slices[0];
    return combine_scalar(s.slices, interp_terms(n, t / s.tg.dt()));
}

VectorField2 interp_cubic(const TimeSeries<VectorField2>& s, double t) {
    const int n = s.size();
    if (n == 1) return s.slices[0];
    const auto terms = interp_terms(n, t / s.tg.dt());
    VectorField2 out(s.slices[0].grid());
    auto a1 = out.u1.mutable_values();
    auto a2 = out.u2.mutable_values();
    for (auto [j, w] : terms) {
        kernels::axpy(w, s.slices[j].u1.values(), a1);
        kernels::axpy(w, s.slices[j].u2.values(), a2);
    }
    return out;
}

ScalarField time_derivative4(const TimeSeries<ScalarField>& s, int j) {
    const int n = s.size();
    if (n < 5)
        throw std::invalid_argument("time_derivative4: need >= 5 slices");
    const int center = std::clamp(j, 2, n - 3);
    const auto w = fd5_weights(j - (center - 2));
    ScalarField out(s.slices[0].grid(), 0.0);
    auto acc = out.mutable_values();
    const double inv_dt = 1.0 / s.tg.dt();
    for (int i = 0; i < 5; ++i)
        kernels::axpy(w[i] * inv_dt, s.slices[center - 2 + i].values(), acc);
    return out;
}

VectorField2 time_derivative4(const TimeSeries<VectorField2>& s, int j) {
    const int n = s.size();
    if (n < 5)
        throw std::invalid_argument("time_derivative4: need >= 5 slices");
    const int center = std::clamp(j, 2, n - 3);
    const auto w = fd5_weights(j - (center - 2));
    VectorField2 out(s.slices[0].grid());
    auto a1 = out.u1.mutable_values();
    auto a2 = out.u2.mutable_values();
    const double inv_dt = 1.0 / s.tg.dt();
    for (int i = 0; i < 5; ++i) {
        kernels::axpy(w[i] * inv_dt, s.slices[center - 2 + i].u1.values(), a1);
        kernels::axpy(w[i] * inv_dt, s.slices[center - 2 + i].u2.values(), a2);
    }
    return out;
}

VectorField2 FlowMap::disp_at(double t) const {
    const int n = int(displacement.size());
    if (n == 1) return displacement[0];
    const double u = (t - tg.time(j_begin)) / tg.dt();
    const auto terms = interp_terms(n, u);
    VectorField2 out(displacement[0].grid());
    auto a1 = out.u1.mutable_values();
    auto a2 = out.u2.mutable_values();
    for (auto [j, w] : terms) {
        kernels::axpy(w, displacement[j].u1.values(), a1);
        kernels::axpy(w, displacement[j].u2.values(), a2);
    }
    return out;
}

// --------------------------------------------------------------- flow map

namespace {

struct FlowRhs {
    const std::vector<VectorField2>& v_win;  // on the solve grid, per slice
    TimeGrid tg;
    int j_begin;
    Grid grid;
    int kcut;

    VectorField2 velocity_at(double t) const {
        const int n = int(v_win.size());
        VectorField2 out(grid);
        if (n == 1) return v_win[0];
        const double u = (t - tg.time(j_begin)) / tg.dt();
        const auto terms = interp_terms(n, u);
        auto a1 = out.u1.mutable_values();
        auto a2 = out.u2.mutable_values();
        for (auto [j, w] : terms) {
            kernels::axpy(w, v_win[j].u1.values(), a1);
            kernels::axpy(w, v_win[j].u2.values(), a2);
        }
        return out;
    }

    /// dD/dt = -(v . grad) D - v
    std::array<SpectralField, 2> operator()(
        double t, const std::array<SpectralField, 2>& d_hat) const {
        const VectorField2 v = velocity_at(t);
        std::array<SpectralField, 2> out{SpectralField(grid),
                                         SpectralField(grid)};
        for (int comp = 0; comp < 2; ++comp) {
            const SpectralField& dh = d_hat[comp];
            ScalarField dx = ScalarField::from_spectral(derivative(dh, 1, 0));
            ScalarField dy = ScalarField::from_spectral(derivative(dh, 0, 1));
            ScalarField rhs(grid, 0.0);
            auto r = rhs.mutable_values();
            kernels::multiply_add(v.u1.values(), dx.values(), -1.0, r);
            kernels::multiply_add(v.u2.values(), dy.values(), -1.0, r);
            kernels::axpy(-1.0, (comp == 0 ? v.u1 : v.u2).values(), r);
            fft::forward(grid.n, rhs.values().data(), out[comp].c.data());
            truncate(out[comp], kcut);
        }
        return out;
    }
};

void axpy_spec(std::array<SpectralField, 2>& y, double a,
               const std::array<SpectralField, 2>& x) {
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < y[c].c.size(); ++i)
            y[c].c[i] += a * x[c].c[i];
}

void rk4_step(const FlowRhs& rhs, double t, double h,
              std::array<SpectralField, 2>& d_hat) {
    auto k1 = rhs(t, d_hat);
    auto s2 = d_hat;
    axpy_spec(s2, h / 2, k1);
    auto k2 = rhs(t + h / 2, s2);
    auto s3 = d_hat;
    axpy_spec(s3, h / 2, k2);
    auto k3 = rhs(t + h / 2, s3);
    auto s4 = d_hat;
    axpy_spec(s4, h, k3);
    auto k4 = rhs(t + h, s4);
    axpy_spec(d_hat, h / 6, k1);
    axpy_spec(d_hat, h / 3, k2);
    axpy_spec(d_hat, h / 3, k3);
    axpy_spec(d_hat, h / 6, k4);
}

}  // namespace

FlowMap solve_inverse_flow(const TimeSeries<VectorField2>& v_series,
                           int chart_index, int mu, double t_lo, double t_hi,
                           const FlowSolveOptions& opt) {
    const TimeGrid tg = v_series.tg;
    const double anchor = double(chart_index) / mu;
    t_lo = std::max(0.0, t_lo);
    t_hi = std::min(1.0, t_hi);
    if (!(t_lo <= anchor && anchor <= t_hi))
        throw std::invalid_argument("solve_inverse_flow: anchor outside window");

    const Grid grid = opt.solve_grid;
    const int kcut = grid.dealias_cut();

    const int j_begin = std::max(0, int(std::floor(t_lo / tg.dt() + 1e-12)));
    const int j_end =
        std::min(tg.n_t - 1, int(std::ceil(t_hi / tg.dt() - 1e-12)));
    const int n_win = j_end - j_begin + 1;

    std::vector<VectorField2> v_win;
    v_win.reserve(n_win);
    double sup_v = 0.0;
    for (int j = j_begin; j <= j_end; ++j) {
        v_win.push_back(resample(v_series.at(j), grid));
        sup_v = std::max(sup_v, sup_norm(v_win.back()));
    }
    FlowRhs rhs{v_win, tg, j_begin, grid, kcut};

    const double stab = 2.8 / (kcut * sup_v + 1e-30);
    double dt_step = opt.cfl * stab;
    const double norm1 =
        sup_v + holder_seminorm(v_win[n_win / 2], 1, 0.0);
    dt_step = std::min(dt_step, opt.max_dt_v1 / (norm1 + 1e-30));
    if (opt.forced_dt) {
        if (*opt.forced_dt * norm1 > opt.max_dt_v1) {
            std::ostringstream os;
            os << "solve_inverse_flow: dt*||v||_1 = " << *opt.forced_dt * norm1
               << " > " << opt.max_dt_v1;
            throw StepUnstable(os.str());
        }
        dt_step = *opt.forced_dt;
    }

    FlowMap fm;
    fm.chart_index = chart_index;
    fm.anchor = anchor;
    fm.tg = tg;
    fm.j_begin = j_begin;
    fm.displacement.assign(std::size_t(n_win), VectorField2());

    auto march = [&](int dir) {
        std::array<SpectralField, 2> d_hat{SpectralField(grid),
                                           SpectralField(grid)};
        double t = anchor;
        int j = dir > 0 ? int(std::ceil(anchor / tg.dt() - 1e-12))
                        : int(std::floor(anchor / tg.dt() + 1e-12));
        while (j >= j_begin && j <= j_end) {
            const double target = tg.time(j);
            const double span = target - t;
            if (std::abs(span) > 1e-15) {
                const int m =
                    std::max(1, int(std::ceil(std::abs(span) / dt_step)));
                const double h = span / m;
                for (int s = 0; s < m; ++s) rk4_step(rhs, t + s * h, h, d_hat);
                t = target;
            }
            VectorField2 d(grid);
            fft::inverse(grid.n, d_hat[0].c.data(),
                         d.u1.mutable_values().data());
            fft::inverse(grid.n, d_hat[1].c.data(),
                         d.u2.mutable_values().data());
            fm.displacement[std::size_t(j - j_begin)] = std::move(d);
            j += dir;
        }
    };
    march(+1);
    march(-1);
    return fm;
}

// ------------------------------------------------- transport - diffusion

namespace {

struct ThetaStepper {
    Grid grid;
    int kcut;
    bool diffusion;
    ForcingFn forcing;

    std::vector<double> exp_h, exp_h2;
    double cached_h = -1.0;

    void prepare(double h) {
        if (h == cached_h) return;
        cached_h = h;
        const int n = grid.n;
        const int cols = n / 2 + 1;
        exp_h.assign(fft::spectral_size(n), 1.0);
        exp_h2.assign(fft::spectral_size(n), 1.0);
        if (!diffusion) return;
        for (int iy = 0; iy < n; ++iy) {
            const int ky = signed_wavenumber(iy, n);
            for (int kx = 0; kx < cols; ++kx) {
                const double k2 = double(kx) * kx + double(ky) * ky;
                exp_h[std::size_t(iy) * cols + kx] = std::exp(-k2 * h);
                exp_h2[std::size_t(iy) * cols + kx] = std::exp(-k2 * h / 2);
            }
        }
    }

    /// N(theta) = FFT(-v.grad theta) + f_hat, truncated. The advection's
    /// k = 0 mode is exactly zero for divergence-free v and is zeroed.
    SpectralField nonlinearity(const SpectralField& th, const VectorField2& v,
                               double t) const {
        ScalarField tx = ScalarField::from_spectral(derivative(th, 1, 0));
        ScalarField ty = ScalarField::from_spectral(derivative(th, 0, 1));
        ScalarField adv(grid, 0.0);
        auto a = adv.mutable_values();
        kernels::multiply_add(v.u1.values(), tx.values(), -1.0, a);
        kernels::multiply_add(v.u2.values(), ty.values(), -1.0, a);
        SpectralField out(grid);
        fft::forward(grid.n, adv.values().data(), out.c.data());
        truncate(out, kcut);
        out.c[0] = 0.0;
        if (forcing) {
            ScalarField f = forcing(t);
            const ScalarField fr = f.grid() == grid ? f : resample(f, grid);
            SpectralField fh(grid);
            fft::forward(grid.n, fr.values().data(), fh.c.data());
            truncate(fh, kcut);
            for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += fh.c[i];
        }
        return out;
    }

    void apply(const std::vector<double>& e, SpectralField& s) const {
        for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] *= e[i];
    }

    void step(double t, double h, const VectorField2& v_t,
              const VectorField2& v_mid, const VectorField2& v_end,
              SpectralField& th) {
        prepare(h);
        const SpectralField k1 = nonlinearity(th, v_t, t);
        SpectralField s2 = th;
        for (std::size_t i = 0; i < s2.c.size(); ++i)
            s2.c[i] += 0.5 * h * k1.c[i];
        apply(exp_h2, s2);
        const SpectralField k2 = nonlinearity(s2, v_mid, t + h / 2);
        SpectralField s3 = th;
        apply(exp_h2, s3);
        for (std::size_t i = 0; i < s3.c.size(); ++i)
            s3.c[i] += 0.5 * h * k2.c[i];
        const SpectralField k3 = nonlinearity(s3, v_mid, t + h / 2);
        SpectralField s4 = th;
        apply(exp_h, s4);
        for (std::size_t i = 0; i < s4.c.size(); ++i)
            s4.c[i] += h * exp_h2[i] * k3.c[i];
        const SpectralField k4 = nonlinearity(s4, v_end, t + h);
        apply(exp_h, th);
        for (std::size_t i = 0; i < th.c.size(); ++i)
            th.c[i] += h / 6.0 *
                       (exp_h[i] * k1.c[i] +
                        2.0 * exp_h2[i] * (k2.c[i] + k3.c[i]) + k4.c[i]);
    }
};

}  // namespace

TimeSeries<ScalarField> solve_transport_diffusion_lazy(
    TimeGrid tg, const std::function<VectorField2(int)>& v_slice,
    const Grid& v_grid, const ScalarField& theta0, const ForcingFn& forcing,
    TransportDiffusionOptions opt) {
    const Grid grid = v_grid;
    const int kcut = grid.dealias_cut();

    std::map<int, VectorField2> ring;
    auto slice = [&](int j) -> const VectorField2& {
        j = std::clamp(j, 0, tg.n_t - 1);
        auto it = ring.find(j);
        if (it == ring.end()) it = ring.emplace(j, v_slice(j)).first;
        return it->second;
    };
    auto velocity_at = [&](double t) {
        const int n = tg.n_t;
        VectorField2 out(grid);
        auto a1 = out.u1.mutable_values();
        auto a2 = out.u2.mutable_values();
        if (n < 4) {
            const double u = std::clamp(t / tg.dt(), 0.0, double(n - 1));
            const int j = std::min(int(u), n - 2);
            const double w1 = u - j;
            kernels::axpy(1.0 - w1, slice(j).u1.values(), a1);
            kernels::axpy(w1, slice(j + 1).u1.values(), a1);
            kernels::axpy(1.0 - w1, slice(j).u2.values(), a2);
            kernels::axpy(w1, slice(j + 1).u2.values(), a2);
            return out;
        }
        const int j0 = std::clamp(int(std::floor(t / tg.dt())), 0, n - 1);
        const int base = std::clamp(j0 - 1, 0, n - 4);
        const auto w = cubic_weights(t / tg.dt() - (base + 1));
        for (int i = 0; i < 4; ++i) {
            const VectorField2& s = slice(base + i);
            kernels::axpy(w[i], s.u1.values(), a1);
            kernels::axpy(w[i], s.u2.values(), a2);
        }
        return out;
    };

    const VectorField2& v0 = slice(0);
    {
        const double divsup = sup_norm(divergence(v0));
        const double scale = 1.0 + holder_seminorm(v0, 1, 0.0);
        if (divsup > 1e-10 * scale)
            throw std::invalid_argument(
                "solve_transport_diffusion: velocity not divergence-free");
    }
    const double sup_v = sup_norm(v0);
    const double norm1 = sup_v + holder_seminorm(v0, 1, 0.0);
    double dt_target = opt.cfl * 2.8 / (kcut * sup_v + 1e-30);
    dt_target = std::min(dt_target, 0.25 / (norm1 + 1e-30));
    dt_target = std::min(dt_target, tg.dt());
    if (opt.forced_dt) {
        if (*opt.forced_dt * norm1 > 0.25)
            throw StepUnstable(
                "solve_transport_diffusion: forced dt violates dt*||v||_1 <= 1/4");
        dt_target = *opt.forced_dt;
    }

    ThetaStepper stepper{grid, kcut, opt.diffusion, forcing};

    TimeSeries<ScalarField> out(tg);
    const ScalarField th0 =
        theta0.grid() == grid ? theta0 : resample(theta0, grid);
    SpectralField th(grid);
    fft::forward(grid.n, th0.values().data(), th.c.data());
    truncate(th, kcut);

    const Grid store_grid = opt.store_n > 0 ? Grid(opt.store_n) : grid;
    auto store = [&](const SpectralField& s) {
        if (store_grid == grid)
            out.slices.push_back(ScalarField::from_spectral(s));
        else
            out.slices.push_back(
                ScalarField::from_spectral(cib::resample(s, store_grid)));
    };
    store(th);

    for (int j = 0; j + 1 < tg.n_t; ++j) {
        const double t0 = tg.time(j), t1 = tg.time(j + 1);
        const int m = std::max(opt.min_substeps_per_slice,
                               int(std::ceil((t1 - t0) / dt_target)));
        const double h = (t1 - t0) / m;
        for (int s = 0; s < m; ++s) {
            const double t = t0 + s * h;
            stepper.step(t, h, velocity_at(t), velocity_at(t + h / 2),
                         velocity_at(t + h), th);
        }
        store(th);
        while (!ring.empty() && ring.begin()->first < j - 2)
            ring.erase(ring.begin());
    }
    return out;
}

TimeSeries<ScalarField> solve_transport_diffusion(
    const TimeSeries<VectorField2>& v, const ScalarField& theta0,
    const ForcingFn& forcing, TransportDiffusionOptions opt) {
    return solve_transport_diffusion_lazy(
        v.tg, [&](int j) { return v.at(j); }, v.slices.at(0).grid(), theta0,
        forcing, opt);
}

std::vector<double> theta_energy_ledger(const TimeSeries<ScalarField>& theta) {
    const int n = theta.size();
    std::vector<double> half_l2(n), grad_sq(n);
    for (int j = 0; j < n; ++j) {
        const SpectralField s = theta.at(j).spectral();
        const double l2 = kTwoPi * coefficient_l2(s);
        const double h1 = kTwoPi * hs_norm(s, 1.0);
        half_l2[j] = 0.5 * l2 * l2;
        grad_sq[j] = h1 * h1;
    }
    const auto cum = cumulative_integral(grad_sq, theta.tg.dt());
    std::vector<double> ledger(n);
    for (int j = 0; j < n; ++j) ledger[j] = half_l2[j] + cum[j];
    return ledger;
}

TransportEstimateReport transport_estimate_probe(
    const TimeSeries<VectorField2>& v, const ScalarField& f0,
    const ForcingFn& g, double t_end, double alpha) {
    TransportDiffusionOptions opt;
    opt.diffusion = false;
    TimeSeries<ScalarField> f = solve_transport_diffusion(v, f0, g, opt);
    const int n_end = std::min(f.size() - 1,
                               int(std::round(t_end / f.tg.dt())));

    std::vector<double> g_sup(n_end + 1, 0.0), g_holder(n_end + 1, 0.0);
    if (g) {
        for (int j = 0; j <= n_end; ++j) {
            const ScalarField gj = g(f.tg.time(j));
            g_sup[j] = sup_norm(gj);
            g_holder[j] = holder_norm(gj, 0, alpha);
        }
    }
    const auto cum_sup = cumulative_integral(g_sup, f.tg.dt());
    const auto cum_holder = cumulative_integral(g_holder, f.tg.dt());

    TransportEstimateReport rep;
    rep.alpha = alpha;
    const double f0_sup = sup_norm(f0);
    const double f0_holder = holder_norm(f0, 0, alpha);
    rep.sup_ok = true;
    rep.holder_ok = true;
    for (int j = 0; j <= n_end; ++j) {
        const double lhs_sup = sup_norm(f.at(j));
        const double rhs_sup = f0_sup + cum_sup[j];
        if (lhs_sup > rep.sup_lhs) {
            rep.sup_lhs = lhs_sup;
            rep.sup_rhs = rhs_sup;
        }
        if (lhs_sup > rhs_sup * (1.0 + 1e-7) + 1e-10) rep.sup_ok = false;
        const double lhs_h = holder_norm(f.at(j), 0, alpha);
        const double rhs_h = 2.0 * (f0_holder + cum_holder[j]);
        if (lhs_h > rep.holder_lhs) {
            rep.holder_lhs = lhs_h;
            rep.holder_rhs = rhs_h;
        }
        if (lhs_h > rhs_h * (1.0 + 1e-7) + 1e-10) rep.holder_ok = false;
    }

    const double v1 = holder_seminorm(v.at(0), 1, 0.0);
    if (v1 > 0) {
        FlowSolveOptions fopt;
        fopt.solve_grid = v.slices.at(0).grid();
        const double span = std::min(t_end, 0.5 / std::max(1.0, v1));
        FlowMap fm = solve_inverse_flow(v, 0, 1, 0.0, span, fopt);
        double worst = 0.0;
        for (int j = fm.j_begin;
             j < fm.j_begin + int(fm.displacement.size()); ++j) {
            const double gap = std::abs(fm.tg.time(j) - fm.anchor);
            if (gap < 1e-12) continue;
            const VectorField2& d = fm.disp(j);
            const double dev =
                std::max({sup_norm(spectral_derivative(d.u1, 1, 0)),
                          sup_norm(spectral_derivative(d.u1, 0, 1)),
                          sup_norm(spectral_derivative(d.u2, 1, 0)),
                          sup_norm(spectral_derivative(d.u2, 0, 1))});
            worst = std::max(worst, dev / (gap * v1));
        }
        rep.gradphi_constant = worst;
    }
    return rep;
}

ForcedDecayResult forced_transport_decay_probe(Grid grid,
                                               const std::vector<int>& lambdas,
                                               double sweep_speed,
                                               double horizon) {
    ForcedDecayResult res;
    const int kcut = grid.dealias_cut();

    for (int lam : lambdas) {
        if (lam + 2 > kcut)
            throw Unresolved("forced_transport_decay_probe: lambda above cut");
        ScalarField f_space =
            ScalarField::from_function(grid, [&](double x, double y) {
                return (1.0 + 0.2 * std::cos(x) + 0.2 * std::sin(y)) *
                       std::cos(lam * x);
            });
        ForcingFn forcing = [&](double) { return f_space; };

        VectorField2 sweep(grid);
        for (auto& x : sweep.u1.mutable_values()) x = sweep_speed;

        ThetaStepper stepper{grid, kcut, true, forcing};
        SpectralField th(grid);
        // resolve the forced-mode rotation rate (lambda + band) * U
        const double dt_acc = 0.35 / ((lam + 2.0) * sweep_speed);
        const int m = std::max(1, int(std::ceil(horizon / dt_acc)));
        const double h = horizon / m;
        double sup_l2 = 0.0;
        for (int s = 0; s < m; ++s) {
            stepper.step(s * h, h, sweep, sweep, sweep, th);
            sup_l2 = std::max(sup_l2, kTwoPi * coefficient_l2(th));
        }
        res.lambdas.push_back(double(lam));
        res.sup_l2.push_back(sup_l2);
    }
    res.fitted_slope = res.lambdas.size() >= 2
                           ? loglog_slope(res.lambdas, res.sup_l2)
                           : 0.0;
    return res;
}

}  // namespace cib
