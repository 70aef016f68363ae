// Command-line front end: configure, run stages, verify, export.
#include <filesystem>
#include <fstream>
#include <cmath>
#include <iostream>

#include "CLI11.hpp"
#include "cib/io.hpp"
#include "cib/kernels.hpp"

namespace fs = std::filesystem;
using namespace cib;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;

struct RunPaths {
    fs::path dir;
    fs::path config() const { return dir / "config.cfg"; }
    fs::path manifest() const { return dir / "manifest.txt"; }
};

void log_line(const std::string& s) { std::cout << "[cib2] " << s << "\n"; }

int cmd_init(const std::string& config_path, const std::string& out_override) {
    Config cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    RunPaths rp{fs::path(cfg.out_dir)};
    fs::create_directories(rp.dir);
    {
        std::ofstream f(rp.config());
        f << config_to_text(cfg);
    }
    RunManifest m;
    m.set("status", "initialized");
    m.set("a", cfg.a);
    m.set("gamma", cfg.gamma);
    m.set("lambda0", double(cfg.lambda0));
    m.set("N", double(cfg.n));
    m.set("n_t", double(cfg.n_t));
    m.set("mode", cfg.mode);
    m.add_file(rp.dir, "config.cfg");
    write_manifest(rp.manifest(), m);
    log_line("initialized run directory " + rp.dir.string());
    return kExitOk;
}

/// Derived geometry: storage grids sized from the top oscillation
/// frequency unless the config pins them.
void fill_geometry(Config& cfg) {
    const double lam_top = cfg.lambdas.empty()
                               ? cfg.lambda0
                               : cfg.lambdas.back();
    if (cfg.store_n == 0) {
        int n = int(lam_top * 6.4);
        n = std::max(n, 4 * cfg.lambda0);
        n = std::max(64, std::min(n, cfg.n));
        n += n % 2;
        cfg.store_n = n;
    }
    if (cfg.theta_store_n == 0) cfg.theta_store_n = cfg.store_n;
}

int cmd_run(const std::string& out_dir, int stages_override,
            const std::string& mode_override) {
    RunPaths rp{fs::path(out_dir)};
    Config cfg = load_config(rp.config());
    fill_geometry(cfg);
    if (stages_override >= 0) cfg.stages = stages_override;
    if (!mode_override.empty()) {
        if (mode_override != "toy" && mode_override != "strict")
            throw ConfigError("run: --mode must be toy or strict");
        cfg.mode = mode_override;
    }
    kernels::set_parallel(!cfg.deterministic);

    EnergyProfile e(cfg.energy_coeffs);
    ParamSchedule sched;
    sched.a = cfg.a;
    sched.gamma = cfg.gamma;
    sched.toy_lambdas = cfg.lambdas;
    if (!cfg.lambdas.empty() && int(cfg.lambdas[0]) != cfg.lambda0)
        sched.toy_lambdas.insert(sched.toy_lambdas.begin(),
                                 double(cfg.lambda0));

    Grid grid(cfg.n);
    TimeGrid tg(cfg.n_t);
    const int state0_n =
        std::max(32, std::min(cfg.n, 8 * cfg.lambda0 + 8 - (8 * cfg.lambda0) % 2));
    log_line("initial tuple at lambda0 = " + std::to_string(cfg.lambda0));
    StageState state = initial_tuple(e, cfg.theta0_sin, cfg.theta0_cos,
                                     cfg.lambda0, sched.delta(1),
                                     Grid(state0_n), tg);

    RunManifest m = read_manifest(rp.manifest());
    m.set("status", "ran");
    m.set("stages", double(cfg.stages));
    {
        // the smallest admissible oscillation frequency for the start tuple
        const double eps0 = measure_epsilon0(DirectionFamily(0), 256);
        const double eta_est = e.min_value() * 0.5 * eps0;  // before C0
        m.set("lambda0_min_estimate",
              double(min_lambda0_for_stress(e, sched.delta(1),
                                            eta_est / 50.0)));
    }

    auto record_residual = [&](const StageState& st) {
        auto rep = residual_boussinesq_reynolds(st, Grid(cfg.n), 8);
        const std::string tag = "state" + std::to_string(st.q);
        m.set(tag + "_momentum_residual", rep.momentum_sup);
        m.set(tag + "_temperature_residual", rep.temperature_sup);
        m.set(tag + "_divergence_rel", rep.divergence_rel);
        log_line(tag + ": momentum residual " +
                 std::to_string(rep.momentum_sup));
    };
    auto dump_state = [&](const StageState& st) {
        const std::string tag = "state" + std::to_string(st.q);
        dump_series(rp.dir / (tag + "_v.cib2"), st.v, cfg.dump_stride);
        dump_series(rp.dir / (tag + "_p.cib2"), st.p, cfg.dump_stride);
        dump_series(rp.dir / (tag + "_theta.cib2"), st.theta, cfg.dump_stride);
        dump_series(rp.dir / (tag + "_r.cib2"), st.r, cfg.dump_stride);
        for (const char* kind : {"v", "p", "theta", "r"}) {
            write_series_manifest(
                rp.dir / (tag + "_" + kind + ".manifest.txt"), kind, st.v.tg,
                cfg.dump_stride);
            m.add_file(rp.dir, tag + "_" + std::string(kind) + ".cib2");
            m.add_file(rp.dir, tag + "_" + std::string(kind) + ".manifest.txt");
        }
    };
    dump_state(state);
    record_residual(state);

    StageRunOptions opt;
    opt.eval_grid = grid;
    opt.store_n = cfg.store_n;
    opt.theta_store_n = cfg.theta_store_n;
    opt.flow_n = cfg.flow_n;
    opt.kcut = cfg.kcut;
    opt.strict = cfg.mode == "strict";
    opt.crosscheck_stride = cfg.crosscheck_stride;
    opt.log = log_line;

    std::vector<StageState> history;
    history.push_back(std::move(state));
    for (int s = 0; s < cfg.stages; ++s) {
        const StageState& cur = history.back();
        log_line("stage " + std::to_string(cur.q) + " -> " +
                 std::to_string(cur.q + 1));
        StageOutcome out = run_stage(cur, sched, e, opt);
        const std::string tag = "stage" + std::to_string(cur.q);
        write_csv_stress_table(rp.dir / (tag + "_stress.csv"),
                               out.stress.terms);
        write_csv_inequalities(rp.dir / (tag + "_inequalities.csv"),
                               out.params);
        write_csv_gap(rp.dir / (tag + "_gap.csv"), out.gap_next);
        auto est = inductive_estimate_report(cur, out.next, sched, out, e);
        write_csv_estimates(rp.dir / (tag + "_estimates.csv"), est);
        m.add_file(rp.dir, tag + "_stress.csv");
        m.add_file(rp.dir, tag + "_inequalities.csv");
        m.add_file(rp.dir, tag + "_gap.csv");
        m.add_file(rp.dir, tag + "_estimates.csv");
        m.set(tag + "_q", double(cur.q));
        m.set(tag + "_delta_q", sched.delta(cur.q));
        m.set(tag + "_delta_q1", sched.delta(cur.q + 1));
        m.set(tag + "_delta_q2", sched.delta(cur.q + 2));
        m.set(tag + "_lambda_q", sched.lambda(cur.q));
        m.set(tag + "_lambda_q1", out.lambda_next);
        m.set(tag + "_mu", double(out.mu));
        m.set(tag + "_ell", out.ell);
        {
            std::string charts;
            for (int l = 0; l <= out.mu; ++l)
                charts += (l ? "," : "") + std::to_string(l);
            m.set(tag + "_charts", charts);
        }
        m.set(tag + "_M", out.measured_M);
        m.set(tag + "_C0", out.measured_C0);
        m.set(tag + "_eta", out.eta);
        m.set(tag + "_r0", out.r0);
        m.set(tag + "_epsilon0", out.epsilon0);
        m.set(tag + "_osc_crosscheck", out.stress.osc_crosscheck);
        m.set(tag + "_div_w_rel", out.stress.div_w_rel);
        m.set(tag + "_partition_defect", out.partition_defect);
        {
            // human-readable summary of the stage
            std::ofstream sum(rp.dir / (tag + "_summary.txt"));
            sum.precision(12);
            sum << "stage " << cur.q << " -> " << cur.q + 1 << "\n";
            sum << "mu = " << out.mu << ", ell = " << out.ell
                << ", lambda_next = " << out.lambda_next << "\n";
            sum << "measured M = " << out.measured_M << ", C0 = "
                << out.measured_C0 << ", eta = " << out.eta << ", r0 = "
                << out.r0 << ", epsilon0 = " << out.epsilon0 << "\n";
            sum << "oscillatory cross-check = " << out.stress.osc_crosscheck
                << "\n";
            sum << "div w (relative) = " << out.stress.div_w_rel << "\n";
            sum << "sup|w_o| = " << out.stress.w_o_sup << ", sup|w_c| = "
                << out.stress.w_c_sup << "\n";
            sum << "temperature increment: " << out.theta_inc_lhs << " <= "
                << out.theta_inc_rhs << "\n";
            sum << "energy gap (next): " << out.gap_next.max_abs_normalized
                << " vs bound " << out.gap_next.bound << " (budget shape "
                << out.gap_budget << ")\n";
            for (const auto& t : out.stress.terms)
                sum << t.name << ": sup " << t.sup0 << ", shape " << t.bound
                    << ", ratio " << t.ratio << "\n";
        }
        m.add_file(rp.dir, tag + "_summary.txt");
        history.push_back(std::move(out.next));
        dump_state(history.back());
        record_residual(history.back());

        if (history.size() >= 2) {
            std::vector<const StageState*> sp;
            for (const auto& h : history) sp.push_back(&h);
            auto hr = holder_report(sp, sched, out.measured_M,
                                    {0.0, 0.05, 0.1});
            write_csv_holder(rp.dir / "holder_report.csv", hr);
            m.add_file(rp.dir, "holder_report.csv");
        }
    }
    // alias the stress table of the first stage for export tooling
    write_manifest(rp.manifest(), m);
    log_line("run complete");
    return kExitOk;
}

int cmd_verify(const std::string& out_dir, bool probes_only) {
    RunPaths rp{fs::path(out_dir)};
    if (probes_only) {
        log_line("running the decay-law probe suite");
        auto pr = scaling_probe_suite();
        if (fs::exists(rp.dir)) {
            Grid g(256);
            ScalarField a = ScalarField::from_function(
                g, [](double x, double y) {
                    return std::exp(std::cos(x)) * (1.0 + 0.5 * std::sin(y));
                });
            a = band_truncate(a, g.dealias_cut());
            write_csv_probe(rp.dir / "probe_antidiv.csv",
                            antidiv_decay_probe(a, {5, 0}, {8, 16, 32, 64},
                                                 0.0));
            ScalarField bump = ScalarField::from_function(
                g, [](double x, double y) {
                    const double dx = x - M_PI, dy = y - M_PI;
                    return std::exp(-2.0 * (dx * dx + dy * dy));
                });
            bump = band_truncate(bump, g.dealias_cut());
            write_csv_probe(rp.dir / "probe_phase.csv",
                            stationary_phase_probe(bump, {5, 0},
                                                   {5, 10, 20, 40}));
            auto forced = forced_transport_decay_probe(
                Grid(256), {10, 20, 40, 80}, 400.0, 0.01);
            DecayTable ft;
            ft.lambdas = forced.lambdas;
            ft.values = forced.sup_l2;
            ft.fitted_slope = forced.fitted_slope;
            write_csv_probe(rp.dir / "probe_forced_theta.csv", ft);
            log_line("probe tables written to " + rp.dir.string());
        }
        std::cout << "antidiv slope (a=0):   " << pr.antidiv_slope_a0 << "\n";
        std::cout << "antidiv slope (a=0.3): " << pr.antidiv_slope_a3 << "\n";
        std::cout << "forced theta slope:    " << pr.forced_theta_slope << "\n";
        std::cout << "phase slope (bump):    " << pr.phase_slope_bump << "\n";
        std::cout << "phase slope (C2):      " << pr.phase_slope_c2 << "\n";
        return (pr.pass_antidiv && pr.pass_forced && pr.pass_phase)
                   ? kExitOk
                   : kExitCheckFailed;
    }
    RunManifest m = read_manifest(rp.manifest());
    const std::string err = verify_manifest_hashes(rp.dir, m);
    if (!err.empty()) {
        std::cerr << "verify: " << err << "\n";
        return kExitCheckFailed;
    }
    Config cfg = load_config(rp.config());
    // recompute the residuals and compare against the values the run
    // recorded (regression semantics: the dumped data must still produce
    // what the run measured)
    bool ok = true;
    for (int q = 0;; ++q) {
        const std::string tag = "state" + std::to_string(q);
        if (!fs::exists(rp.dir / (tag + "_v.cib2"))) break;
        StageState st;
        st.q = q;
        st.v = as_vector_series(load_series(rp.dir / (tag + "_v.cib2")));
        st.p = as_scalar_series(load_series(rp.dir / (tag + "_p.cib2")));
        st.theta =
            as_scalar_series(load_series(rp.dir / (tag + "_theta.cib2")));
        st.r = as_tensor_series(load_series(rp.dir / (tag + "_r.cib2")));
        auto rep = residual_boussinesq_reynolds(st, Grid(cfg.n), 8);
        std::cout << tag << ": momentum sup " << rep.momentum_sup
                  << ", temperature sup " << rep.temperature_sup
                  << ", div rel " << rep.divergence_rel << "\n";
        auto recorded = [&](const std::string& key, double fallback) {
            auto it = m.kv.find(tag + key);
            return it == m.kv.end() ? fallback : std::stod(it->second);
        };
        const double tol_m =
            std::max(3.0 * recorded("_momentum_residual", 1e-6), 1e-11);
        const double tol_d =
            std::max(3.0 * recorded("_divergence_rel", 1e-10), 1e-13);
        if (rep.momentum_sup > tol_m || rep.divergence_rel > tol_d) {
            std::cerr << "verify: " << tag
                      << " residual exceeds the recorded run value\n";
            ok = false;
        }
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_export(const std::string& out_dir, const std::string& what, double t,
               const std::string& format) {
    RunPaths rp{fs::path(out_dir)};
    if (what == "v" || what == "theta") {
        // latest state with that field
        int q = 0;
        while (fs::exists(rp.dir /
                          ("state" + std::to_string(q + 1) + "_v.cib2")))
            ++q;
        const std::string file =
            "state" + std::to_string(q) + "_" + what + ".cib2";
        auto ls = load_series(rp.dir / file);
        int j_best = 0;
        for (std::size_t j = 0; j < ls.times.size(); ++j)
            if (std::abs(ls.times[j] - t) <
                std::abs(ls.times[j_best] - t))
                j_best = int(j);
        const auto out_name = rp.dir / (what + "_slice.csv");
        if (ls.n_components == 2)
            write_csv_field(out_name, VectorField2(ls.components[j_best][0],
                                                   ls.components[j_best][1]));
        else
            write_csv_field(out_name, ls.components[j_best][0]);
        log_line("wrote " + out_name.string());
        return kExitOk;
    }
    if (what == "stress") {
        const auto src = rp.dir / "stage0_stress.csv";
        if (!fs::exists(src)) {
            std::cerr << "export: no stress table in the run directory\n";
            return kExitCheckFailed;
        }
        log_line("stress table at " + src.string());
        return kExitOk;
    }
    if (what == "gap") {
        const auto src = rp.dir / "stage0_gap.csv";
        if (!fs::exists(src)) {
            std::cerr << "export: no gap series in the run directory\n";
            return kExitCheckFailed;
        }
        log_line("gap series at " + src.string());
        return kExitOk;
    }
    (void)format;
    std::cerr << "export: unknown target '" << what << "'\n";
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral stage-map engine on the 2-torus"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs/out", what = "v",
                format = "csv";
    std::string probe_name, mode;
    int stages = -1;
    double t_slice = 0.0;
    bool deterministic = false;

    auto* init = app.add_subcommand("init", "validate a config, set up a run");
    init->add_option("--config", config_path, "key = value config file")
        ->required();
    init->add_option("--out", out_dir, "override the output directory");

    auto* run = app.add_subcommand("run", "execute stages of the iteration");
    run->add_option("--out", out_dir, "run directory (from init)");
    run->add_option("--stages", stages, "number of stages to run");
    run->add_option("--mode", mode, "toy | strict (overrides the config)");
    run->add_flag("--deterministic", deterministic,
                  "serial kernels for bitwise-reproducible reports");

    auto* verify = app.add_subcommand("verify", "check dumps and residuals");
    verify->add_option("--out", out_dir, "run directory");
    verify->add_option("--probe", probe_name,
                       "run the probe suite instead of state checks");

    auto* exp = app.add_subcommand("export", "write CSV views of a run");
    exp->add_option("--out", out_dir, "run directory");
    exp->add_option("--what", what, "v | theta | stress | gap");
    exp->add_option("--t", t_slice, "time of the requested slice");
    exp->add_option("--format", format, "csv | binary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (init->parsed()) return cmd_init(config_path, init->count("--out") ? out_dir : "");
        if (run->parsed()) {
            if (deterministic) kernels::set_parallel(false);
            return cmd_run(out_dir, stages, mode);
        }
        if (verify->parsed())
            return cmd_verify(out_dir, verify->count("--probe") > 0);
        if (exp->parsed()) return cmd_export(out_dir, what, t_slice, format);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StepUnstable& e) {
        std::cerr << "numerical stability error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const KernelUnresolved& e) {
        std::cerr << "numerical resolution error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const NonPositiveCoefficient& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const NonPositiveEnergyGap& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitConfig;
}
