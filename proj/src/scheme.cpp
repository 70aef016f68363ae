#include "cib/scheme.hpp"

#include <cmath>
#include <sstream>

#include "cib/kernels.hpp"

namespace cib {

EnergyProfile::EnergyProfile(std::vector<double> cosine_coeffs)
    : coeffs_(std::move(cosine_coeffs)) {
    if (coeffs_.empty())
        throw std::invalid_argument("EnergyProfile: no coefficients");
    min_value_ = 1e300;
    for (int i = 0; i <= 4096; ++i) {
        const double t = double(i) / 4096;
        min_value_ = std::min(min_value_, (*this)(t));
        max_abs_deriv_ = std::max(max_abs_deriv_, std::abs(deriv(t)));
    }
    if (min_value_ <= 0.0)
        throw std::invalid_argument("EnergyProfile: e(t) must stay positive");
}

double EnergyProfile::operator()(double t) const {
    double v = coeffs_[0];
    for (std::size_t j = 1; j < coeffs_.size(); ++j)
        v += coeffs_[j] * std::cos(j * M_PI * t);
    return v;
}

double EnergyProfile::deriv(double t) const {
    double v = 0.0;
    for (std::size_t j = 1; j < coeffs_.size(); ++j)
        v -= coeffs_[j] * j * M_PI * std::sin(j * M_PI * t);
    return v;
}

// ------------------------------------------------------------- schedule

double ParamSchedule::log_delta(int q) const {
    return -std::pow(b(), q) * std::log(a);
}
double ParamSchedule::delta(int q) const { return std::exp(log_delta(q)); }

bool ParamSchedule::lambda_overridden(int q) const {
    return q < int(toy_lambdas.size());
}

double ParamSchedule::log_lambda(int q) const {
    if (lambda_overridden(q)) return std::log(toy_lambdas[q]);
    return c() * std::pow(b(), q + 1) * std::log(a);
}

double ParamSchedule::lambda(int q) const {
    if (lambda_overridden(q)) return toy_lambdas[q];
    const double lo = std::exp(log_lambda(q));
    if (lo < 4.5e15) {
        // smallest multiple of 5 in [lo, 2 lo]
        double m = std::ceil(lo / 5.0) * 5.0;
        if (m > 2.0 * lo) m = std::floor(2.0 * lo / 5.0) * 5.0;
        return m;
    }
    return lo;  // divisibility by 5 is immaterial at this magnitude
}

int ParamSchedule::mu(int q) const {
    const double log_mu = 0.25 * log_delta(q) +
                          0.5 * (log_lambda(q) + log_lambda(q + 1));
    const double m = std::exp(log_mu);
    if (m > 2e9) throw std::invalid_argument("ParamSchedule: mu overflows int");
    return std::max(1, int(std::llround(m)));
}

double ParamSchedule::ell(int q) const {
    return std::exp(-0.25 * log_delta(q) -
                    0.5 * (log_lambda(q) + log_lambda(q + 1)));
}

namespace {
InequalityRow make_row(const std::string& name, double log_lhs,
                       double log_rhs) {
    InequalityRow r;
    r.name = name;
    r.log10_lhs = log_lhs / std::log(10.0);
    r.log10_rhs = log_rhs / std::log(10.0);
    r.ok = log_lhs <= log_rhs + 1e-12;
    r.slack_log10 = r.log10_rhs - r.log10_lhs;
    return r;
}
}  // namespace

ParamReport check_parameter_conditions(const ParamSchedule& s, int q) {
    ParamReport rep;
    const double ld_q = s.log_delta(q);
    const double ld_q1 = s.log_delta(q + 1);
    const double ll_q = s.log_lambda(q);
    const double ll_q1 = s.log_lambda(q + 1);
    // use the closed-form mu and ell (rounding is harmless in the report)
    const double lmu = 0.25 * ld_q + 0.5 * (ll_q + ll_q1);
    const double lell = -lmu;

    rep.rows.push_back(make_row("d_q^1/2 l_q ell <= d_q1^1/2",
                                0.5 * ld_q + ll_q + lell, 0.5 * ld_q1));
    {
        // d_q^1/2 l_q / mu + 1/(ell l_q1) <= l_q1^{-beta}; both summands
        // coincide under the parameter choice, so fold the 2 into the lhs
        const double term = 0.5 * ld_q + ll_q - lmu;
        rep.rows.push_back(make_row("d_q^1/2 l_q/mu + 1/(ell l_q1) <= l_q1^-beta",
                                    std::log(2.0) + term, -s.beta * ll_q1));
    }
    rep.rows.push_back(
        make_row("1/l_q1 <= d_q1^1/2 / mu", -ll_q1, 0.5 * ld_q1 - lmu));
    rep.rows.push_back(make_row("ell = 1/mu (parameter choice)", lell, -lmu));
    rep.rows.push_back(make_row(
        "l_q^1/2 d_q^1/4 l_q1^-1/2 d_q1^-1/2 <= 1",
        0.5 * ll_q + 0.25 * ld_q - 0.5 * ll_q1 - 0.5 * ld_q1, 0.0));
    rep.rows.push_back(
        make_row("l_q^1/2 d_q^1/4 l_q1^-1/2 <= (1/2) l_q1^-beta",
                 0.5 * ll_q + 0.25 * ld_q - 0.5 * ll_q1,
                 -std::log(2.0) - s.beta * ll_q1));
    rep.rows.push_back(make_row("ell <= 1/l_q", lell, -ll_q));
    rep.rows.push_back(make_row("1/l_q1 <= ell", -ll_q1, lell));
    rep.all_ok = true;
    for (const auto& r : rep.rows) rep.all_ok = rep.all_ok && r.ok;
    return rep;
}

double find_min_admissible_a(double gamma, int q_max) {
    auto ok = [&](double a) {
        ParamSchedule s;
        s.a = a;
        s.gamma = gamma;
        for (int q = 0; q <= q_max; ++q)
            if (!check_parameter_conditions(s, q).all_ok) return false;
        return true;
    };
    double lo = 1.0 + 1e-9, hi = 1e6;
    if (!ok(hi)) return -1.0;
    if (ok(lo)) return lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (ok(mid) ? hi : lo) = mid;
        if (hi / lo < 1.0 + 1e-4) break;
    }
    return hi;
}

// --------------------------------------------------------- initial tuple

StageState initial_tuple(const EnergyProfile& e, double theta_sin,
                         double theta_cos, int lambda0, double delta1,
                         Grid grid, TimeGrid tg) {
    if (lambda0 < 1)
        throw std::invalid_argument("initial_tuple: lambda0 must be positive");
    if (grid.nyquist() <= lambda0)
        throw Unresolved("initial_tuple: grid does not resolve lambda0");

    StageState st;
    st.q = 0;
    st.v = TimeSeries<VectorField2>(tg);
    st.p = TimeSeries<ScalarField>(tg);
    st.theta = TimeSeries<ScalarField>(tg);
    st.r = TimeSeries<SymTraceFreeTensor2Field>(tg);

    for (int j = 0; j < tg.n_t; ++j) {
        const double t = tg.time(j);
        const double et = e(t);
        const double det = e.deriv(t);
        const double amp = std::sqrt((1.0 - delta1) * et / (2.0 * M_PI * M_PI));
        VectorField2 v(grid);
        v.u1 = ScalarField::from_function(grid, [&](double, double y) {
            return amp * std::sin(lambda0 * y);
        });
        st.v.slices.push_back(std::move(v));

        const double ramp = -std::sqrt(1.0 - delta1) * det /
                            std::sqrt(8.0 * M_PI * M_PI * et) / lambda0;
        SymTraceFreeTensor2Field r(grid);
        r.t12 = ScalarField::from_function(grid, [&](double, double y) {
            return ramp * std::cos(lambda0 * y);
        });
        st.r.slices.push_back(std::move(r));

        const double decay = std::exp(-t);
        st.theta.slices.push_back(
            ScalarField::from_function(grid, [&](double, double y) {
                return decay * (theta_sin * std::sin(y) +
                                theta_cos * std::cos(y));
            }));
        // integral of theta0 from 0 to x2
        st.p.slices.push_back(
            ScalarField::from_function(grid, [&](double, double y) {
                return decay * (theta_sin * (1.0 - std::cos(y)) +
                                theta_cos * std::sin(y));
            }));
    }
    return st;
}

int min_lambda0_for_stress(const EnergyProfile& e, double delta1, double eta) {
    double worst = 0.0;
    for (int i = 0; i <= 4096; ++i) {
        const double t = double(i) / 4096;
        worst = std::max(worst, std::abs(e.deriv(t)) /
                                    std::sqrt(8.0 * M_PI * M_PI * e(t)));
    }
    const double need = std::sqrt(1.0 - delta1) * worst / (eta * delta1);
    return std::max(1, int(std::ceil(need)));
}

EnergyGapReport energy_gap(const TimeSeries<VectorField2>& v,
                           const EnergyProfile& e, double delta_next) {
    EnergyGapReport rep;
    const auto kin = kinetic_energy_series(v);
    for (int j = 0; j < v.size(); ++j) {
        const double t = v.tg.time(j);
        const double g = e(t) * (1.0 - delta_next) - kin[j];
        rep.times.push_back(t);
        rep.gap.push_back(g);
        rep.max_abs_normalized =
            std::max(rep.max_abs_normalized, std::abs(g) / e(t));
    }
    rep.bound = delta_next / 4.0;
    rep.admissible = rep.max_abs_normalized <= rep.bound;
    return rep;
}

// ------------------------------------------------------------ run stage

StageOutcome run_stage(const StageState& state, const ParamSchedule& sched,
                       const EnergyProfile& e, const StageRunOptions& opt) {
    auto log = [&](const std::string& m) {
        if (opt.log) opt.log(m);
    };
    const int q = state.q;
    const TimeGrid tg = state.v.tg;
    const Grid g = opt.eval_grid;
    const double delta_q1 = sched.delta(q + 1);
    const double delta_q2 = sched.delta(q + 2);
    const double lambda_next = sched.lambda(q + 1);
    if (lambda_next > g.dealias_cut() / 2)
        throw Unresolved("run_stage: lambda_{q+1} above the dealias budget");

    StageOutcome out;
    out.params = check_parameter_conditions(sched, q);
    out.lambda_next = lambda_next;
    if (opt.strict && !out.params.all_ok)
        throw ConfigError(
            "run_stage: strict mode refused, parameter inequalities violated");
    {
        EnergyGapReport gap_in = energy_gap(state.v, e, delta_q1);
        if (opt.strict && !gap_in.admissible)
            throw ConfigError("run_stage: strict mode refused, energy gap "
                              "inadmissible at stage entry");
    }

    const int mu = sched.mu(q);
    const double ell = sched.ell(q);
    out.mu = mu;
    out.ell = ell;

    log("mollify: ell = " + std::to_string(ell));
    const int moll_n =
        opt.moll_store_n > 0
            ? opt.moll_store_n
            : std::min(g.n, std::max(32, 8 * active_band(state.v.at(0).u1) + 8));
    Mollifier moll(ell, g, tg.dt());
    TimeSeries<VectorField2> v_ell = moll.apply(state.v, moll_n);
    TimeSeries<SymTraceFreeTensor2Field> r_ell = moll.apply(state.r, moll_n);

    log("partition: mu = " + std::to_string(mu));
    TimePartition partition(mu);

    // rho from the prescribed energy at the chart anchors
    const auto kin = kinetic_energy_series(state.v);
    out.rho.resize(mu + 1);
    for (int l = 0; l <= mu; ++l) {
        const double tl = double(l) / mu;
        // cubic interpolation of the kinetic-energy samples
        const int n = int(kin.size());
        double kin_l;
        if (n < 4) {
            const double u = tl / tg.dt();
            const int j0 = std::min(int(u), n - 2);
            kin_l = kin[j0] * (1 - (u - j0)) + kin[j0 + 1] * (u - j0);
        } else {
            const int j0 = std::clamp(int(std::floor(tl / tg.dt())), 0, n - 1);
            const int base = std::clamp(j0 - 1, 0, n - 4);
            const auto w = cubic_weights(tl / tg.dt() - (base + 1));
            kin_l = w[0] * kin[base] + w[1] * kin[base + 1] +
                    w[2] * kin[base + 2] + w[3] * kin[base + 3];
        }
        out.rho[l] = compute_rho(e(tl), kin_l, delta_q2);
    }
    {
        const double scale = e.min_value() * delta_q1;
        double c0 = 1.0;
        for (double r : out.rho)
            c0 = std::max({c0, r / scale, scale / r});
        out.measured_C0 = c0;
    }

    log("flow maps: " + std::to_string(mu + 1) + " charts");
    FlowSolveOptions fopt;
    fopt.solve_grid = Grid(opt.flow_n);
    std::vector<FlowMap> flows;
    flows.reserve(mu + 1);
    for (int l = 0; l <= mu; ++l)
        flows.push_back(solve_inverse_flow(v_ell, l, mu, (l - 0.9) / mu,
                                           (l + 0.9) / mu, fopt));

    out.epsilon0 = measure_epsilon0(DirectionFamily(0), 256);
    out.r0 = 0.5 * out.epsilon0;
    out.eta = e.min_value() * out.r0 / out.measured_C0;

    const int kcut = opt.kcut > 0
                         ? opt.kcut
                         : std::min(g.dealias_cut(),
                                    (opt.store_n > 0 ? opt.store_n : g.n) / 2 - 2);
    StageGeometry geom{g, kcut, int(lambda_next)};
    PerturbationAssembler pa(geom, partition, std::move(flows), out.rho,
                             &r_ell, out.r0 / 2.0);
    out.partition_defect = pa.partition_defect();

    log("temperature: advancing with the perturbed velocity");
    auto v1_slice = [&](int j) {
        VectorField2 v1 = resample(state.v.at(j), g);
        VectorField2 w = pa.w_slice(j);
        kernels::axpy(1.0, w.u1.values(), v1.u1.mutable_values());
        kernels::axpy(1.0, w.u2.values(), v1.u2.mutable_values());
        SpectralField s1 = v1.u1.spectral();
        SpectralField s2 = v1.u2.spectral();
        truncate(s1, kcut);
        truncate(s2, kcut);
        return VectorField2(ScalarField::from_spectral(s1),
                            ScalarField::from_spectral(s2));
    };
    TransportDiffusionOptions topt;
    topt.store_n = opt.theta_store_n > 0 ? opt.theta_store_n : opt.store_n;
    TimeSeries<ScalarField> theta1 = solve_transport_diffusion_lazy(
        tg, v1_slice, g, state.theta.at(0), nullptr, topt);
    for (const auto& s : theta1.slices)
        out.theta_mean_drift = std::max(
            out.theta_mean_drift,
            std::abs(mean(s) - mean(state.theta.at(0))));

    log("stress: assembling the seven constituents");
    const double delta_q = sched.delta(q);
    const double lam_q = sched.lambda(q);
    const double eps = 0.05;  // reporting exponent for the shape values
    BoundShapes shapes;
    shapes.r0 = std::sqrt(delta_q1) * (mu + 1.0 / ell) *
                std::pow(lambda_next, eps - 1.0);
    shapes.r1 = std::sqrt(delta_q1 * delta_q) * lam_q *
                std::pow(lambda_next, eps - 1.0);
    shapes.r2 = std::sqrt(delta_q1) * std::pow(lambda_next, eps - 1.0);
    shapes.r3 = delta_q1 * std::sqrt(delta_q) * lam_q *
                std::pow(lambda_next, eps) / mu;
    shapes.r4 = delta_q1 * std::sqrt(delta_q) * lam_q / mu;
    shapes.r5 = std::sqrt(delta_q1 * delta_q) * lam_q * ell;
    shapes.r6 = delta_q1 * lam_q * ell;
    shapes.pressure = 0.0;  // filled once M is measured

    StressInputs in;
    in.v = &state.v;
    in.v_ell = &v_ell;
    in.r = &state.r;
    in.r_ell = &r_ell;
    in.theta = &state.theta;
    in.theta1 = &theta1;
    in.p = &state.p;

    StressOptions sopt;
    sopt.store_n = opt.store_n;
    sopt.crosscheck_stride = opt.crosscheck_stride;
    if (opt.log)
        sopt.progress = [&](int j, int n) {
            if (j % std::max(1, n / 8) == 0)
                log("stress: slice " + std::to_string(j) + "/" +
                    std::to_string(n));
        };
    out.stress = assemble_stress(pa, in, shapes, sopt);

    out.measured_M = 2.0 * out.stress.w_o_sup / std::sqrt(delta_q1);
    {
        auto& terms = out.stress.terms;
        if (!terms.empty() && terms.back().name == "P_pressure") {
            terms.back().bound =
                0.5 * out.measured_M * out.measured_M * delta_q1;
            terms.back().ratio = terms.back().sup0 / terms.back().bound;
        }
    }

    // temperature increment ledger against the energy-method bound
    {
        const Grid tgd = theta1.at(0).grid();
        std::vector<double> l2sq(tg.n_t), gradsq(tg.n_t);
        for (int j = 0; j < tg.n_t; ++j) {
            ScalarField d = resample(state.theta.at(j), tgd);
            kernels::scale(d.mutable_values(), -1.0);
            add_in_place(d, theta1.at(j), 1.0);
            const SpectralField s = d.spectral();
            const double l2 = kTwoPi * coefficient_l2(s);
            const double h1 = kTwoPi * hs_norm(s, 1.0);
            l2sq[j] = l2 * l2;
            gradsq[j] = h1 * h1;
        }
        const auto cum = cumulative_integral(gradsq, tg.dt());
        for (int j = 0; j < tg.n_t; ++j)
            out.theta_inc_lhs = std::max(out.theta_inc_lhs, l2sq[j] + cum[j]);
        const double theta0_sup = sup_norm(state.theta.at(0));
        out.theta_inc_rhs =
            4.0 * theta0_sup * theta0_sup * out.stress.w_sup * out.stress.w_sup;
    }

    out.next.q = q + 1;
    out.next.v = std::move(out.stress.v_new);
    out.next.p = std::move(out.stress.p_new);
    out.next.theta = std::move(theta1);
    out.next.r = std::move(out.stress.r_new);
    out.stress.v_new = TimeSeries<VectorField2>(tg);
    out.stress.p_new = TimeSeries<ScalarField>(tg);
    out.stress.r_new = TimeSeries<SymTraceFreeTensor2Field>(tg);

    out.gap_next = energy_gap(out.next.v, e, delta_q2);
    out.gap_budget = e.max_abs_deriv() / mu +
                     std::sqrt(delta_q1 * delta_q) * lam_q / mu +
                     std::sqrt(delta_q1) / (ell * lambda_next);
    log("stage complete");
    return out;
}

}  // namespace cib
