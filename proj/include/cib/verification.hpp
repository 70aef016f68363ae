#pragma once

#include "cib/scheme.hpp"

namespace cib {

struct ResidualReport {
    double momentum_sup = 0.0;
    double momentum_l2 = 0.0;     // rms over space-time
    double divergence_rel = 0.0;  // sup |div v| / (1 + sup |grad v|)
    double temperature_sup = 0.0;
    double theta_mean_drift = 0.0;
};

/// Residual of the stress-augmented system on a state, computed with its
/// own differentiation path (4th-order time stencils, spectral space
/// derivatives, dealiased products) and none of the assembly internals.
ResidualReport residual_boussinesq_reynolds(const StageState& st, Grid eval,
                                            int stride = 1);

struct EstimateRow {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool comparable = false;  // rhs carries a pinned constant
};

/// Rows for the inductive estimates linking two consecutive states, using
/// the measured constants from the stage run.
std::vector<EstimateRow> inductive_estimate_report(
    const StageState& prev, const StageState& next, const ParamSchedule& sched,
    const StageOutcome& outcome, const EnergyProfile& e);

struct ProbeSuiteResult {
    double antidiv_slope_a0 = 0.0;   // alpha = 0, expect <= -1 + 0.15
    double antidiv_slope_a3 = 0.0;   // alpha = 0.3, expect <= -0.7 + 0.15
    double forced_theta_slope = 0.0; // expect -1 +- 0.15
    double phase_slope_bump = 0.0;   // expect <= -2 + 0.2
    double phase_slope_c2 = 0.0;     // synthetic C^2 amplitude
    bool pass_antidiv = false;
    bool pass_forced = false;
    bool pass_phase = false;
};

/// The three decay-law probes at their standard configurations.
ProbeSuiteResult scaling_probe_suite();

struct HolderRow {
    int q = 0;
    double alpha = 0.0;
    double spatial_increment = 0.0;   // [v_{q+1} - v_q]_alpha, max over t
    double temporal_increment = 0.0;  // time-difference quotient
    double interp_bound = 0.0;        // M delta^{1/2} lambda^alpha
    double schedule_bound = 0.0;      // 2 M a^{(-1/2 + alpha b c) b^{q+1}}
};

/// Increment seminorms for a state sequence against the interpolation
/// prediction. Produces no convergence assertion.
std::vector<HolderRow> holder_report(const std::vector<const StageState*>& states,
                                     const ParamSchedule& sched,
                                     double measured_M,
                                     const std::vector<double>& alphas);

}  // namespace cib
