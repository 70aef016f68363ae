#pragma once

#include <string>

#include "cib/stress_assembly.hpp"

namespace cib {

/// Prescribed kinetic energy e(t) = c0 + sum_{j>=1} c_j cos(j pi t);
/// the cosine series keeps e' exact for the initial stress.
class EnergyProfile {
  public:
    explicit EnergyProfile(std::vector<double> cosine_coeffs);

    double operator()(double t) const;
    double deriv(double t) const;
    double min_value() const { return min_value_; }
    double max_abs_deriv() const { return max_abs_deriv_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

  private:
    std::vector<double> coeffs_;
    double min_value_ = 0.0;
    double max_abs_deriv_ = 0.0;
};

/// delta_q = a^{-b^q}; lambda_q the smallest multiple of 5 in
/// [a^{c b^{q+1}}, 2 a^{c b^{q+1}}] (kept in logs when astronomically
/// large); mu and ell from the stage-parameter choice. Toy runs override
/// the lambda sequence with explicit multiples of 5.
struct ParamSchedule {
    double a = 4.0;
    double gamma = 0.4;
    double beta = 0.125;
    std::vector<double> toy_lambdas;  // optional override

    double b() const { return (6.0 + gamma) / 4.0; }
    double c() const { return 4.0 * (5.0 + gamma) / (6.0 + gamma); }

    double log_delta(int q) const;  // natural log
    double delta(int q) const;
    double log_lambda(int q) const;
    double lambda(int q) const;
    bool lambda_overridden(int q) const;

    /// mu rounded to a positive integer, ell its reciprocal shape.
    int mu(int q) const;
    double ell(int q) const;
};

struct InequalityRow {
    std::string name;
    double log10_lhs = 0.0;
    double log10_rhs = 0.0;
    bool ok = false;
    double slack_log10 = 0.0;  // rhs - lhs in log10
};

struct ParamReport {
    std::vector<InequalityRow> rows;
    bool all_ok = false;
};

/// The stage-parameter inequalities and the explicit parameter-choice
/// chain, evaluated in log space so astronomically large values stay
/// exact enough.
ParamReport check_parameter_conditions(const ParamSchedule& sched, int q);

/// Smallest a (bisection, reported to ~1e-3 relative) at which every
/// inequality holds for all q in [0, q_max].
double find_min_admissible_a(double gamma, int q_max);

/// Stage tuple: time-sampled (v, p, theta, stress) plus the stage index.
struct StageState {
    int q = 0;
    TimeSeries<VectorField2> v;
    TimeSeries<ScalarField> p;
    TimeSeries<ScalarField> theta;
    TimeSeries<SymTraceFreeTensor2Field> r;
};

/// Explicit start tuple: a single-mode shear carrying the full prescribed
/// energy (up to the delta_1 margin), the matching one-mode stress, and
/// the exactly-decaying temperature with its hydrostatic pressure.
StageState initial_tuple(const EnergyProfile& e, double theta_sin,
                         double theta_cos, int lambda0, double delta1,
                         Grid grid, TimeGrid tg);

/// Smallest lambda0 with sup|R0| <= eta delta_1.
int min_lambda0_for_stress(const EnergyProfile& e, double delta1, double eta);

struct EnergyGapReport {
    std::vector<double> times;
    std::vector<double> gap;         // e(t)(1-delta) - int |v|^2
    double max_abs_normalized = 0.0; // max |gap| / e(t)
    double bound = 0.0;              // delta_next / 4
    bool admissible = false;
};
EnergyGapReport energy_gap(const TimeSeries<VectorField2>& v,
                           const EnergyProfile& e, double delta_next);

struct StageRunOptions {
    Grid eval_grid;            // products grid
    int store_n = 0;           // state storage grid (0: eval)
    int theta_store_n = 0;
    int flow_n = 96;           // displacement solve grid
    int moll_store_n = 0;      // mollified-field storage (0: auto)
    int kcut = 0;              // 0: derived from eval/store
    bool strict = false;
    int crosscheck_stride = 1;
    std::function<void(const std::string&)> log;
};

struct StageOutcome {
    StageState next;
    StressResult stress;
    std::vector<double> rho;
    int mu = 0;
    double ell = 0.0;
    double lambda_next = 0.0;
    double measured_M = 0.0;     // 2 sup|w_o| / sqrt(delta_{q+1})
    double measured_C0 = 0.0;    // rho vs min(e) delta_{q+1} constant
    double eta = 0.0;            // C0^{-1} r0 min(e)
    double r0 = 0.0;             // admissibility radius used
    double epsilon0 = 0.0;       // measured positivity radius
    EnergyGapReport gap_next;    // against delta_{q+2}
    double gap_budget = 0.0;     // C(e)/mu + ... shape value
    double theta_inc_lhs = 0.0;  // max_t ||dth||^2 + int ||grad dth||^2
    double theta_inc_rhs = 0.0;  // 4 ||theta0||_0^2 ||w||_0^2
    double theta_mean_drift = 0.0;
    double partition_defect = 0.0;
    ParamReport params;
};

/// One pass of the stage map. Toy mode reports inequality violations and
/// continues; strict mode refuses on any violated inequality or
/// inadmissible energy gap.
StageOutcome run_stage(const StageState& state, const ParamSchedule& sched,
                       const EnergyProfile& e, const StageRunOptions& opt);

}  // namespace cib
