#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cib/errors.hpp"
#include "cib/field.hpp"
#include "cib/field_ops.hpp"
#include "cib/util.hpp"

namespace cib {

/// Uniform time samples t_j = j/(n_t - 1) on [0,1].
struct TimeGrid {
    int n_t = 0;

    TimeGrid() = default;
    explicit TimeGrid(int n) : n_t(n) {
        if (n < 2) throw std::invalid_argument("TimeGrid: n_t must be >= 2");
    }
    double dt() const { return 1.0 / (n_t - 1); }
    double time(int j) const { return double(j) / (n_t - 1); }
};

/// Time-sampled field with cubic interpolation between slices.
template <class FieldT>
struct TimeSeries {
    TimeGrid tg;
    std::vector<FieldT> slices;

    TimeSeries() = default;
    explicit TimeSeries(TimeGrid t) : tg(t) { slices.reserve(t.n_t); }

    const FieldT& at(int j) const { return slices.at(j); }
    FieldT& at(int j) { return slices.at(j); }
    int size() const { return int(slices.size()); }
};

/// Cubic Lagrange interpolation of a scalar time series.
ScalarField interp_cubic(const TimeSeries<ScalarField>& s, double t);
VectorField2 interp_cubic(const TimeSeries<VectorField2>& s, double t);

/// 4th-order time derivative at slice j (central in the interior, one-sided
/// 5-point stencils at the ends).
ScalarField time_derivative4(const TimeSeries<ScalarField>& s, int j);
VectorField2 time_derivative4(const TimeSeries<VectorField2>& s, int j);

/// Inverse flow map of a divergence-free velocity, identity at the anchor
/// time: Phi(t,x) = x + D(t,x) where D solves
///     dD/dt + v . grad D = -v,   D(anchor) = 0
/// pseudo-spectrally with RK4 over arbitrary step sequences; equivalent to
/// integrating the backward characteristics of every node. D is stored on
/// its own (possibly coarser) grid; the gradient comes out spectrally.
class FlowMap {
  public:
    int chart_index = 0;
    double anchor = 0.0;
    TimeGrid tg;                  // global time grid the slices align with
    int j_begin = 0;              // first stored slice index
    std::vector<VectorField2> displacement;  // D at t_j, j = j_begin..

    bool covers(int j) const {
        return j >= j_begin && j < j_begin + int(displacement.size());
    }
    const VectorField2& disp(int j) const {
        return displacement.at(std::size_t(j - j_begin));
    }

    /// Identity-anchored displacement evaluated off-grid (cubic in time).
    VectorField2 disp_at(double t) const;
};

struct FlowSolveOptions {
    Grid solve_grid;     // grid the displacement PDE runs on
    double cfl = 0.5;    // fraction of the stability limit for substeps
    double max_dt_v1 = 0.25;  // guard: substep * ||v||_1 must stay below this
    std::optional<double> forced_dt;  // testing hook; checked against guard
};

/// v_series must cover [t_lo, t_hi]; window is clipped to [0,1]. Throws
/// StepUnstable if the guard cannot be met.
FlowMap solve_inverse_flow(const TimeSeries<VectorField2>& v_series,
                           int chart_index, int mu, double t_lo, double t_hi,
                           const FlowSolveOptions& opt);

/// Forcing for the transport-diffusion solver: either a time-sampled
/// series or an analytic function of (t, grid) producing a slice.
using ForcingFn = std::function<ScalarField(double)>;

struct TransportDiffusionOptions {
    bool diffusion = true;
    double cfl = 0.5;
    int min_substeps_per_slice = 1;
    std::optional<double> forced_dt;  // testing hook; guarded
    int store_n = 0;                  // 0: store on the solver grid
};

/// Advance d_t theta + v . grad theta - Lap theta = f with an exact
/// integrating factor for the diffusion and RK4 for the rest; v is
/// interpolated cubically in time between its slices. Returns theta on the
/// same time grid as v. Mean is conserved when f has zero mean.
TimeSeries<ScalarField> solve_transport_diffusion(
    const TimeSeries<VectorField2>& v, const ScalarField& theta0,
    const ForcingFn& forcing = nullptr,
    TransportDiffusionOptions opt = {});

/// Same solver driven by a lazily reconstructed velocity: slice_fn(j) must
/// return v at time-grid slice j on a fixed grid.
TimeSeries<ScalarField> solve_transport_diffusion_lazy(
    TimeGrid tg, const std::function<VectorField2(int)>& v_slice,
    const Grid& v_grid, const ScalarField& theta0,
    const ForcingFn& forcing = nullptr,
    TransportDiffusionOptions opt = {});

/// t -> 1/2 ||theta(t)||_L2^2 + int_0^t ||grad theta||_L2^2; constant in
/// time for unforced solutions.
std::vector<double> theta_energy_ledger(const TimeSeries<ScalarField>& theta);

struct TransportEstimateReport {
    // sup-norm inequality ||f(t)||_0 <= ||f0||_0 + int ||g||_0
    double sup_lhs = 0, sup_rhs = 0;
    // Hoelder inequality with the stated factor 2
    double holder_lhs = 0, holder_rhs = 0;
    double alpha = 0;
    // ||grad Phi - Id||_0 <= C |t-t0| [v]_1 : measured C
    double gradphi_constant = 0;
    bool sup_ok = false, holder_ok = false;
};

/// Evolve pure transport (diffusion off) and check the a priori estimates
/// with their stated constants on the window [0, t_end].
TransportEstimateReport transport_estimate_probe(
    const TimeSeries<VectorField2>& v, const ScalarField& f0,
    const ForcingFn& g, double t_end, double alpha);

/// ||theta||_{L^inf L^2} decay of the forced solution against lambda:
/// forcing a(x) cos(lambda x_1), sweeping velocity, short horizon.
struct ForcedDecayResult {
    std::vector<double> lambdas;
    std::vector<double> sup_l2;
    double fitted_slope = 0;
};
ForcedDecayResult forced_transport_decay_probe(Grid grid,
                                               const std::vector<int>& lambdas,
                                               double sweep_speed,
                                               double horizon);

}  // namespace cib
