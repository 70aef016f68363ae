#include "cib/stage_builder.hpp"

#include <cmath>
#include <sstream>

#include "cib/kernels.hpp"

namespace cib {

// ------------------------------------------------------------- partition

namespace {

double psi_raw(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double psi_raw_d(double s) {
    return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0;
}

/// Smooth step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u) {
    const double a = psi_raw(u), b = psi_raw(1.0 - u);
    return a / (a + b);
}
double smooth_step_d(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = psi_raw(u), b = psi_raw(1.0 - u);
    const double ad = psi_raw_d(u), bd = -psi_raw_d(1.0 - u);
    const double s = a + b;
    return (ad * s - a * (ad + bd)) / (s * s);
}

/// Bump: 1 on [-1/4,1/4], 0 outside (-3/4,3/4).
double bump(double x) { return smooth_step((0.75 - std::abs(x)) * 2.0); }
double bump_d(double x) {
    const double sgn = x >= 0.0 ? 1.0 : -1.0;
    return smooth_step_d((0.75 - std::abs(x)) * 2.0) * (-2.0 * sgn);
}

}  // namespace

TimePartition::TimePartition(int mu) : mu_(mu) {
    if (mu < 1) throw std::invalid_argument("TimePartition: mu must be >= 1");
}

double TimePartition::chi(double x) const {
    const double b0 = bump(x);
    if (b0 == 0.0) return 0.0;
    const double bm = bump(x - 1.0), bp = bump(x + 1.0);
    return b0 / std::sqrt(b0 * b0 + bm * bm + bp * bp);
}

double TimePartition::dchi(double x) const {
    const double b0 = bump(x);
    if (b0 == 0.0) return 0.0;
    const double bm = bump(x - 1.0), bp = bump(x + 1.0);
    const double s = b0 * b0 + bm * bm + bp * bp;
    const double d0 = bump_d(x), dm = bump_d(x - 1.0), dp = bump_d(x + 1.0);
    const double ds = 2.0 * (b0 * d0 + bm * dm + bp * dp);
    return d0 / std::sqrt(s) - b0 * ds / (2.0 * s * std::sqrt(s));
}

std::vector<int> TimePartition::active_charts(double t) const {
    std::vector<int> out;
    const double x = mu_ * t;
    const int lo = std::max(0, int(std::ceil(x - 0.75)));
    const int hi = std::min(mu_, int(std::floor(x + 0.75)));
    for (int l = lo; l <= hi; ++l)
        if (chi_l(l, t) != 0.0) out.push_back(l);
    return out;
}

double TimePartition::sum_sq(double t) const {
    double s = 0.0;
    for (int l : active_charts(t)) {
        const double c = chi_l(l, t);
        s += c * c;
    }
    return s;
}

// ------------------------------------------------------------- mollifier

namespace {
/// 1D bump weight (also the radial profile), support (-1,1).
double time_bump(double s) {
    const double a = 1.0 - s * s;
    return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}
}  // namespace

Mollifier::Mollifier(double ell, Grid field_grid, double dt) : ell_(ell) {
    if (ell < 2.0 * std::max(field_grid.spacing(), dt)) {
        std::ostringstream os;
        os << "Mollifier: ell = " << ell << " below resolution (h = "
           << field_grid.spacing() << ", dt = " << dt << ")";
        throw KernelUnresolved(os.str());
    }
    // Radial symbol m(rho) = int b(|y|) e^{-i rho y.e1} dy / mass, tabulated
    // through a J0 quadrature; entire in rho, read back cubically.
    const int quad_n = 400;
    const int table_n = 4096;
    rho_max_ = ell * field_grid.nyquist() * 1.4143 + 1.0;
    table_.assign(table_n, 0.0);
    std::vector<double> br(quad_n), rr(quad_n);
    double mass = 0.0;
    for (int q = 0; q < quad_n; ++q) {
        const double r = (q + 0.5) / quad_n;
        rr[q] = r;
        br[q] = time_bump(r) * r;
        mass += br[q];
    }
    for (int i = 0; i < table_n; ++i) {
        const double rho = rho_max_ * i / (table_n - 1);
        double acc = 0.0;
        for (int q = 0; q < quad_n; ++q)
            acc += br[q] * std::cyl_bessel_j(0.0, rho * rr[q]);
        table_[i] = acc / mass;
    }
}

double Mollifier::symbol(double k2) const {
    const double rho = ell_ * std::sqrt(k2);
    if (rho >= rho_max_) return table_.back();
    const double u = rho / rho_max_ * (table_.size() - 1);
    const int n = int(table_.size());
    const int base = std::clamp(int(u) - 1, 0, n - 4);
    const auto w = cubic_weights(u - (base + 1));
    return w[0] * table_[base] + w[1] * table_[base + 1] +
           w[2] * table_[base + 2] + w[3] * table_[base + 3];
}

std::vector<ScalarField> Mollifier::smooth_in_space(
    const std::vector<const ScalarField*>& slices, double dt,
    int store_n) const {
    const int n_t = int(slices.size());
    const Grid in_grid = slices[0]->grid();
    const Grid out_grid = store_n > 0 ? Grid(store_n) : in_grid;

    std::vector<ScalarField> spatial(n_t);
    for (int j = 0; j < n_t; ++j) {
        SpectralField s = slices[j]->spectral();
        scale_by_symbol(s, [&](double k2) { return symbol(k2); });
        spatial[j] = ScalarField::from_spectral(
            out_grid == in_grid ? s : resample(s, out_grid));
    }

    // discrete time convolution, weights renormalized over [0,1]
    const int reach = int(std::floor(ell_ / dt));
    std::vector<ScalarField> out(n_t);
#pragma omp parallel for schedule(dynamic, 8) if (kernels::parallel_enabled())
    for (int j = 0; j < n_t; ++j) {
        const int lo = std::max(0, j - reach);
        const int hi = std::min(n_t - 1, j + reach);
        double wsum = 0.0;
        std::vector<double> w(hi - lo + 1);
        for (int m = lo; m <= hi; ++m) {
            w[m - lo] = time_bump((m - j) * dt / ell_);
            wsum += w[m - lo];
        }
        ScalarField acc(out_grid, 0.0);
        auto a = acc.mutable_values();
        for (int m = lo; m <= hi; ++m)
            kernels::serial::axpy(w[m - lo] / wsum, spatial[m].values(), a);
        out[j] = std::move(acc);
    }
    return out;
}

TimeSeries<ScalarField> Mollifier::apply(const TimeSeries<ScalarField>& f,
                                         int store_n) const {
    std::vector<const ScalarField*> view;
    for (const auto& s : f.slices) view.push_back(&s);
    TimeSeries<ScalarField> out(f.tg);
    out.slices = smooth_in_space(view, f.tg.dt(), store_n);
    return out;
}

TimeSeries<VectorField2> Mollifier::apply(const TimeSeries<VectorField2>& f,
                                          int store_n) const {
    std::vector<const ScalarField*> v1, v2;
    for (const auto& s : f.slices) {
        v1.push_back(&s.u1);
        v2.push_back(&s.u2);
    }
    auto o1 = smooth_in_space(v1, f.tg.dt(), store_n);
    auto o2 = smooth_in_space(v2, f.tg.dt(), store_n);
    TimeSeries<VectorField2> out(f.tg);
    for (std::size_t j = 0; j < o1.size(); ++j)
        out.slices.emplace_back(std::move(o1[j]), std::move(o2[j]));
    return out;
}

TimeSeries<SymTraceFreeTensor2Field> Mollifier::apply(
    const TimeSeries<SymTraceFreeTensor2Field>& f, int store_n) const {
    std::vector<const ScalarField*> v1, v2;
    for (const auto& s : f.slices) {
        v1.push_back(&s.t11);
        v2.push_back(&s.t12);
    }
    auto o1 = smooth_in_space(v1, f.tg.dt(), store_n);
    auto o2 = smooth_in_space(v2, f.tg.dt(), store_n);
    TimeSeries<SymTraceFreeTensor2Field> out(f.tg);
    for (std::size_t j = 0; j < o1.size(); ++j)
        out.slices.emplace_back(std::move(o1[j]), std::move(o2[j]));
    return out;
}

// ----------------------------------------------------------------- rho

double compute_rho(double e_at_l, double kinetic_at_l, double delta_next2) {
    const double bracket = e_at_l * (1.0 - delta_next2) - kinetic_at_l;
    if (bracket <= 0.0) {
        std::ostringstream os;
        os << "compute_rho: energy bracket " << bracket << " not positive";
        throw NonPositiveEnergyGap(os.str());
    }
    return bracket / (2.0 * kTwoPi * kTwoPi);
}

std::vector<double> kinetic_energy_series(const TimeSeries<VectorField2>& v) {
    std::vector<double> out(v.size());
    for (int j = 0; j < v.size(); ++j) {
        const double a = l2_norm(v.at(j).u1), b = l2_norm(v.at(j).u2);
        out[j] = a * a + b * b;
    }
    return out;
}

// ------------------------------------------------------------ amplitudes

AmplitudeSlice amplitude_fields(const DirectionFamily& family, double rho,
                                const SymTraceFreeTensor2Field& r_ell,
                                Grid eval_grid) {
    const auto& w = family.solve_weights();
    const SpectralField s11 = resample(r_ell.t11.spectral(), eval_grid);
    const SpectralField s12 = resample(r_ell.t12.spectral(), eval_grid);
    const SymTraceFreeTensor2Field r(ScalarField::from_spectral(s11),
                                     ScalarField::from_spectral(s12));
    const auto t11 = r.t11.values();
    const auto t12 = r.t12.values();
    const std::size_t n = t11.size();

    const VectorField2 g11(ScalarField::from_spectral(derivative(s11, 1, 0)),
                           ScalarField::from_spectral(derivative(s11, 0, 1)));
    const VectorField2 g12(ScalarField::from_spectral(derivative(s12, 1, 0)),
                           ScalarField::from_spectral(derivative(s12, 0, 1)));

    AmplitudeSlice out;
    for (int k = 0; k < 3; ++k) {
        out.a[k] = ScalarField(eval_grid);
        out.grad_a[k] = VectorField2(eval_grid);
    }
    std::array<std::span<double>, 3> a_v{out.a[0].mutable_values(),
                                         out.a[1].mutable_values(),
                                         out.a[2].mutable_values()};
    std::array<std::span<double>, 3> gx_v{out.grad_a[0].u1.mutable_values(),
                                          out.grad_a[1].u1.mutable_values(),
                                          out.grad_a[2].u1.mutable_values()};
    std::array<std::span<double>, 3> gy_v{out.grad_a[0].u2.mutable_values(),
                                          out.grad_a[1].u2.mutable_values(),
                                          out.grad_a[2].u2.mutable_values()};
    const auto g11x = g11.u1.values(), g11y = g11.u2.values();
    const auto g12x = g12.u1.values(), g12y = g12.u2.values();

    double max_dev_sq = 0.0;
    const double inv_rho = 1.0 / rho;
#pragma omp parallel for schedule(static) reduction(max : max_dev_sq) \
    if (kernels::parallel_enabled())
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
        // R~ = Id - R_ell/rho in (11,12,22) components
        const double r11 = 1.0 - t11[i] * inv_rho;
        const double r12 = -t12[i] * inv_rho;
        const double r22 = 1.0 + t11[i] * inv_rho;
        max_dev_sq = std::max(
            max_dev_sq,
            2.0 * (t11[i] * t11[i] + t12[i] * t12[i]) * inv_rho * inv_rho);
        for (int k = 0; k < 3; ++k) {
            const double c = w[k][0] * r11 + w[k][1] * r12 + w[k][2] * r22;
            if (c <= 0.0) {
                a_v[k][i] = -1.0;  // flagged after the loop
                continue;
            }
            a_v[k][i] = std::sqrt(rho * c);
            const double cx =
                ((w[k][2] - w[k][0]) * g11x[i] - w[k][1] * g12x[i]) * inv_rho;
            const double cy =
                ((w[k][2] - w[k][0]) * g11y[i] - w[k][1] * g12y[i]) * inv_rho;
            const double scale = 0.5 * std::sqrt(rho / c);
            gx_v[k][i] = scale * cx;
            gy_v[k][i] = scale * cy;
        }
    }
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (a_v[k][i] < 0.0)
                throw NonPositiveCoefficient(
                    "amplitude_fields: coefficient not positive on the grid");
    out.max_dev = std::sqrt(max_dev_sq);
    return out;
}

// ------------------------------------------------------------ assembler

PerturbationAssembler::PerturbationAssembler(
    StageGeometry geom, TimePartition partition, std::vector<FlowMap> flows,
    std::vector<double> rho, const TimeSeries<SymTraceFreeTensor2Field>* r_ell,
    double admissible_dev)
    : geom_(geom),
      partition_(std::move(partition)),
      flows_(std::move(flows)),
      rho_(std::move(rho)),
      r_ell_(r_ell),
      admissible_dev_(admissible_dev) {}

const FlowMap* PerturbationAssembler::flow_for(int l) const {
    for (const auto& f : flows_)
        if (f.chart_index == l) return &f;
    return nullptr;
}

double PerturbationAssembler::rho_weight(double t) const {
    double acc = 0.0;
    for (int l : partition_.active_charts(t)) {
        const double c = partition_.chi_l(l, t);
        acc += c * c * rho_.at(l);
    }
    return acc;
}

std::shared_ptr<const ChartSlice> PerturbationAssembler::chart_slice(int l,
                                                                     int j) {
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
        if (it->first == std::make_pair(l, j)) {
            cache_.splice(cache_.begin(), cache_, it);
            return cache_.front().second;
        }
    }
    const FlowMap* fm = flow_for(l);
    if (!fm || !fm->covers(j))
        throw std::logic_error("chart_slice: flow map missing slice");
    const Grid g = geom_.eval_grid;

    auto cs = std::make_shared<ChartSlice>();
    cs->l = l;
    cs->j = j;
    const double t = fm->tg.time(j);
    cs->chi = partition_.chi_l(l, t);
    cs->dchi = partition_.dchi_l(l, t);
    cs->rho = rho_.at(l);
    cs->family = (l % 2 == 0) ? &fam0_ : &fam1_;

    {
        // transform on the flow grid (cheap), pad once, derive spectrally
        const SpectralField d1 = resample(fm->disp(j).u1.spectral(), g);
        const SpectralField d2 = resample(fm->disp(j).u2.spectral(), g);
        cs->disp = VectorField2(ScalarField::from_spectral(d1),
                                ScalarField::from_spectral(d2));
        cs->grad_disp[0] = ScalarField::from_spectral(derivative(d1, 1, 0));
        cs->grad_disp[1] = ScalarField::from_spectral(derivative(d1, 0, 1));
        cs->grad_disp[2] = ScalarField::from_spectral(derivative(d2, 1, 0));
        cs->grad_disp[3] = ScalarField::from_spectral(derivative(d2, 0, 1));
    }

    cs->amp = amplitude_fields(*cs->family, cs->rho, r_ell_->at(j), g);
    if (cs->amp.max_dev > admissible_dev_) {
        std::ostringstream os;
        os << "chart " << l << " slice " << j << ": |Id - R/rho| = "
           << cs->amp.max_dev << " exceeds admissible " << admissible_dev_;
        throw NonPositiveCoefficient(os.str());
    }

    const auto& ks = cs->family->plus_set();
    for (int k = 0; k < 3; ++k) {
        const Direction kp = ks[k].perp();
        auto [s1, s2] = kp.scaled(geom_.lambda);
        cs->shift[k] = {s1, s2};
        cs->mode[k] = ComplexField(g);
        ScalarField angle(g);
        {
            auto av = angle.mutable_values();
            const auto dv1 = cs->disp.u1.values();
            const auto dv2 = cs->disp.u2.values();
            const int n = g.n;
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
            for (int iy = 0; iy < n; ++iy) {
                const double x2 = g.x2(iy);
                for (int ix = 0; ix < n; ++ix) {
                    const std::size_t idx = std::size_t(iy) * n + ix;
                    av[idx] =
                        s1 * (g.x1(ix) + dv1[idx]) + s2 * (x2 + dv2[idx]);
                }
            }
        }
        kernels::sincos(angle.values(), cs->mode[k].re.mutable_values(),
                        cs->mode[k].im.mutable_values());
    }

    cache_.emplace_front(std::make_pair(l, j),
                         std::shared_ptr<const ChartSlice>(std::move(cs)));
    if (cache_.size() > cache_cap_) cache_.pop_back();
    return cache_.front().second;
}

VectorField2 PerturbationAssembler::w_o_slice(int j) {
    const Grid g = geom_.eval_grid;
    VectorField2 out(g);
    const double t = flows_.at(0).tg.time(j);
    auto o1 = out.u1.mutable_values();
    auto o2 = out.u2.mutable_values();
    for (int l : partition_.active_charts(t)) {
        auto cs = chart_slice(l, j);
        const auto& ks = cs->family->plus_set();
        for (int k = 0; k < 3; ++k) {
            // w_o += chi * 2 Re(a i k U) = -2 chi a Im(U) k
            const auto a = cs->amp.a[k].values();
            const auto im = cs->mode[k].im.values();
            kernels::multiply_add(a, im, -2.0 * cs->chi * ks[k].x(), o1);
            kernels::multiply_add(a, im, -2.0 * cs->chi * ks[k].y(), o2);
        }
    }
    return out;
}

VectorField2 PerturbationAssembler::w_c_slice(int j) {
    const Grid g = geom_.eval_grid;
    VectorField2 out(g);
    const double t = flows_.at(0).tg.time(j);
    const double inv_lam = 1.0 / geom_.lambda;
    auto o1 = out.u1.mutable_values();
    auto o2 = out.u2.mutable_values();
    const std::size_t n = g.size();
    for (int l : partition_.active_charts(t)) {
        auto cs = chart_slice(l, j);
        const auto& ks = cs->family->plus_set();
        const auto dx1 = cs->grad_disp[0].values();
        const auto dy1 = cs->grad_disp[1].values();
        const auto dx2 = cs->grad_disp[2].values();
        const auto dy2 = cs->grad_disp[3].values();
        for (int k = 0; k < 3; ++k) {
            const double kpx = ks[k].perp().x(), kpy = ks[k].perp().y();
            const auto a = cs->amp.a[k].values();
            const auto ax = cs->amp.grad_a[k].u1.values();
            const auto ay = cs->amp.grad_a[k].u2.values();
            const auto re = cs->mode[k].re.values();
            const auto im = cs->mode[k].im.values();
            const double c = -2.0 * cs->chi;
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
                // m = grad_perp(k_perp . D)
                const double pdx = kpx * dx1[i] + kpy * dx2[i];
                const double pdy = kpx * dy1[i] + kpy * dy2[i];
                // contribution -chi 2 Re{ [grad_perp(a)/lam + i a m] U }
                const double re1 = -ay[i] * inv_lam, im1 = -a[i] * pdy;
                const double re2 = ax[i] * inv_lam, im2 = a[i] * pdx;
                o1[i] += c * (re1 * re[i] - im1 * im[i]);
                o2[i] += c * (re2 * re[i] - im2 * im[i]);
            }
        }
    }
    return out;
}

VectorField2 PerturbationAssembler::w_slice(int j) {
    VectorField2 wo = w_o_slice(j);
    VectorField2 wc = w_c_slice(j);
    kernels::axpy(1.0, wc.u1.values(), wo.u1.mutable_values());
    kernels::axpy(1.0, wc.u2.values(), wo.u2.mutable_values());
    return wo;
}

VectorField2 PerturbationAssembler::w_from_L_slice(int j) {
    const Grid g = geom_.eval_grid;
    VectorField2 out(g);
    const double t = flows_.at(0).tg.time(j);
    const double inv_lam = 1.0 / geom_.lambda;
    auto o1 = out.u1.mutable_values();
    auto o2 = out.u2.mutable_values();
    const std::size_t n = g.size();
    for (int l : partition_.active_charts(t)) {
        auto cs = chart_slice(l, j);
        const auto& ks = cs->family->plus_set();
        const auto dx1 = cs->grad_disp[0].values();
        const auto dy1 = cs->grad_disp[1].values();
        const auto dx2 = cs->grad_disp[2].values();
        const auto dy2 = cs->grad_disp[3].values();
        for (int k = 0; k < 3; ++k) {
            const double kx = ks[k].x(), ky = ks[k].y();
            const double kpx = ks[k].perp().x(), kpy = ks[k].perp().y();
            const auto a = cs->amp.a[k].values();
            const auto ax = cs->amp.grad_a[k].u1.values();
            const auto ay = cs->amp.grad_a[k].u2.values();
            const auto re = cs->mode[k].re.values();
            const auto im = cs->mode[k].im.values();
            const double c = 2.0 * cs->chi;
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
                const double pdx = kpx * dx1[i] + kpy * dx2[i];
                const double pdy = kpx * dy1[i] + kpy * dy2[i];
                // L = a i k - grad_perp(a)/lambda - i a grad_perp(kp.D)
                const double reL1 = ay[i] * inv_lam;
                const double imL1 = a[i] * (kx + pdy);
                const double reL2 = -ax[i] * inv_lam;
                const double imL2 = a[i] * (ky - pdx);
                o1[i] += c * (reL1 * re[i] - imL1 * im[i]);
                o2[i] += c * (reL2 * re[i] - imL2 * im[i]);
            }
        }
    }
    return out;
}

namespace {

struct SignedDir {
    Direction k;  // signed direction
    int idx;      // index into the plus set
    bool neg;
};

std::array<SignedDir, 6> signed_set(const DirectionFamily& fam) {
    const auto& ks = fam.plus_set();
    return {SignedDir{ks[0], 0, false}, SignedDir{ks[1], 1, false},
            SignedDir{ks[2], 2, false}, SignedDir{-ks[0], 0, true},
            SignedDir{-ks[1], 1, true}, SignedDir{-ks[2], 2, true}};
}

}  // namespace

ScalarField PerturbationAssembler::pressure_slice(int j) {
    const Grid g = geom_.eval_grid;
    ScalarField out(g);
    const double t = flows_.at(0).tg.time(j);
    auto o = out.mutable_values();
    const std::size_t n = g.size();
    const auto charts = partition_.active_charts(t);

    // Pairs are enumerated with the first member in the plus set; the
    // conjugate class (-k, -k') is folded in through 2 Re.
    auto add_pairs = [&](const ChartSlice& A, const ChartSlice& B,
                         double weight, bool same_chart) {
        const auto& ks = A.family->plus_set();
        for (int a_i = 0; a_i < 3; ++a_i)
            for (const auto& b : signed_set(*B.family)) {
                if (same_chart && b.neg && b.idx == a_i) continue;  // k' = -k
                const double coeff = ks[a_i].dot(b.k) - 1.0;
                if (coeff == 0.0) continue;
                const double w = 0.5 * weight * coeff;
                const auto aa = A.amp.a[a_i].values();
                const auto ab = B.amp.a[b.idx].values();
                const auto re1 = A.mode[a_i].re.values();
                const auto im1 = A.mode[a_i].im.values();
                const auto re2 = B.mode[b.idx].re.values();
                const auto im2 = B.mode[b.idx].im.values();
                const double sgn = b.neg ? -1.0 : 1.0;
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
                for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
                    // 2 Re(a a' U U'), the negative member conjugated
                    const double pr = re1[i] * re2[i] - sgn * im1[i] * im2[i];
                    o[i] += 2.0 * w * aa[i] * ab[i] * pr;
                }
            }
    };

    for (int l : charts) {
        auto cs = chart_slice(l, j);
        add_pairs(*cs, *cs, cs->chi * cs->chi, true);
    }
    for (int l : charts)
        for (int lp : charts) {
            if (l == lp) continue;
            auto cl = chart_slice(l, j);
            auto cp = chart_slice(lp, j);
            add_pairs(*cl, *cp, cl->chi * cp->chi, false);
        }
    return out;
}

VectorField2 PerturbationAssembler::osc_slice(int j) {
    const Grid g = geom_.eval_grid;
    VectorField2 out(g);
    const double t = flows_.at(0).tg.time(j);
    auto o1 = out.u1.mutable_values();
    auto o2 = out.u2.mutable_values();
    const std::size_t n = g.size();
    const double lam = geom_.lambda;
    const auto charts = partition_.active_charts(t);

    // One interaction pair contributes
    //   2 Re{ weight * M [grad(aa') + i lam aa' q] U U' }
    // with M = -1/2 (k x k' + k' x k) + 1/2 (k.k' - 1) Id and
    // q = grad(k_perp . D) + grad(k'_perp . D'); only the real part is
    // accumulated.
    auto add_pairs = [&](const ChartSlice& A, const ChartSlice& B,
                         double weight, bool same_chart) {
        const auto& ks = A.family->plus_set();
        for (int a_i = 0; a_i < 3; ++a_i)
            for (const auto& b : signed_set(*B.family)) {
                if (same_chart && b.neg && b.idx == a_i) continue;
                const Direction ka = ks[a_i];
                const Direction kb = b.k;
                const double half_tr = 0.5 * (ka.dot(kb) - 1.0);
                const double m11 = -(ka.x() * kb.x()) + half_tr;
                const double m12 = -0.5 * (ka.x() * kb.y() + ka.y() * kb.x());
                const double m22 = -(ka.y() * kb.y()) + half_tr;
                const double sgnb = b.neg ? -1.0 : 1.0;
                const double apx = ka.perp().x(), apy = ka.perp().y();
                const double bpx = kb.perp().x(), bpy = kb.perp().y();

                const auto aa = A.amp.a[a_i].values();
                const auto aax = A.amp.grad_a[a_i].u1.values();
                const auto aay = A.amp.grad_a[a_i].u2.values();
                const auto ab = B.amp.a[b.idx].values();
                const auto abx = B.amp.grad_a[b.idx].u1.values();
                const auto aby = B.amp.grad_a[b.idx].u2.values();
                const auto re1 = A.mode[a_i].re.values();
                const auto im1 = A.mode[a_i].im.values();
                const auto re2 = B.mode[b.idx].re.values();
                const auto im2 = B.mode[b.idx].im.values();
                const auto Adx1 = A.grad_disp[0].values();
                const auto Ady1 = A.grad_disp[1].values();
                const auto Adx2 = A.grad_disp[2].values();
                const auto Ady2 = A.grad_disp[3].values();
                const auto Bdx1 = B.grad_disp[0].values();
                const auto Bdy1 = B.grad_disp[1].values();
                const auto Bdx2 = B.grad_disp[2].values();
                const auto Bdy2 = B.grad_disp[3].values();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
                for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
                    const double ur = re1[i] * re2[i] - sgnb * im1[i] * im2[i];
                    const double ui = sgnb * re1[i] * im2[i] + im1[i] * re2[i];
                    const double gx = aax[i] * ab[i] + aa[i] * abx[i];
                    const double gy = aay[i] * ab[i] + aa[i] * aby[i];
                    const double qx = apx * Adx1[i] + apy * Adx2[i] +
                                      bpx * Bdx1[i] + bpy * Bdx2[i];
                    const double qy = apx * Ady1[i] + apy * Ady2[i] +
                                      bpx * Bdy1[i] + bpy * Bdy2[i];
                    const double s = lam * aa[i] * ab[i];
                    // Re{ [g + i s q] (ur + i ui) }
                    const double fx = gx * ur - s * qx * ui;
                    const double fy = gy * ur - s * qy * ui;
                    o1[i] += 2.0 * weight * (m11 * fx + m12 * fy);
                    o2[i] += 2.0 * weight * (m12 * fx + m22 * fy);
                }
            }
    };

    for (int l : charts) {
        auto cs = chart_slice(l, j);
        add_pairs(*cs, *cs, cs->chi * cs->chi, true);
    }
    for (int l : charts)
        for (int lp : charts) {
            if (l == lp) continue;
            auto cl = chart_slice(l, j);
            auto cp = chart_slice(lp, j);
            add_pairs(*cl, *cp, cl->chi * cp->chi, false);
        }
    return out;
}

double PerturbationAssembler::partition_defect(int samples) const {
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = double(i) / samples;
        worst = std::max(worst, std::abs(partition_.sum_sq(t) - 1.0));
    }
    return worst;
}

}  // namespace cib
