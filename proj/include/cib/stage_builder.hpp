#pragma once

#include <list>
#include <memory>

#include "cib/building_blocks.hpp"
#include "cib/evolution.hpp"

namespace cib {

/// Partition of unity in time: chi_l(t) = chi(mu t - l) with
/// sum_l chi_l^2 = 1, built from a C-infinity bump b supported in
/// (-3/4, 3/4), b = 1 on [-1/4, 1/4], via chi = b / sqrt(sum_j b^2(.-j)).
class TimePartition {
  public:
    explicit TimePartition(int mu);

    int mu() const { return mu_; }
    /// Base cutoff and its derivative.
    double chi(double x) const;
    double dchi(double x) const;
    double chi_l(int l, double t) const { return chi(mu_ * t - l); }
    /// d/dt chi_l(t)
    double dchi_l(int l, double t) const { return mu_ * dchi(mu_ * t - l); }
    /// Charts with chi_l(t) != 0, restricted to l in [0, mu].
    std::vector<int> active_charts(double t) const;
    double sum_sq(double t) const;

  private:
    int mu_;
};

/// Space-time mollification at radius ell: spectral radial-bump symbol in
/// space, compact bump weights in time (renormalized over [0,1] near the
/// ends so constants are preserved exactly). Throws KernelUnresolved when
/// ell is below twice the grid spacing or time step.
class Mollifier {
  public:
    Mollifier(double ell, Grid field_grid, double dt);

    double ell() const { return ell_; }
    /// Spatial symbol value at squared wavenumber k2 (1 at k = 0).
    double symbol(double k2) const;

    TimeSeries<ScalarField> apply(const TimeSeries<ScalarField>& f,
                                  int store_n = 0) const;
    TimeSeries<VectorField2> apply(const TimeSeries<VectorField2>& f,
                                   int store_n = 0) const;
    TimeSeries<SymTraceFreeTensor2Field> apply(
        const TimeSeries<SymTraceFreeTensor2Field>& f, int store_n = 0) const;

  private:
    std::vector<ScalarField> smooth_in_space(
        const std::vector<const ScalarField*>& slices, double dt,
        int store_n) const;

    double ell_;
    std::vector<double> table_;  // symbol samples on [0, rho_max]
    double rho_max_;
};

/// rho_l = [e(l/mu)(1 - delta_next2) - kinetic(l/mu)] / (2 (2pi)^2);
/// throws NonPositiveEnergyGap when the bracket is not positive.
double compute_rho(double e_at_l, double kinetic_at_l, double delta_next2);

/// integral |v|^2 dx per slice.
std::vector<double> kinetic_energy_series(const TimeSeries<VectorField2>& v);

/// Amplitudes a_k = sqrt(rho) gamma_k((rho Id - R_ell)/rho) and their
/// gradients on the evaluation grid, plus the measured deviation
/// sup_x |Id - R_{ell,l}/rho|_F. Gradients come from the chain rule on the
/// exact linear solve, so no extra transforms of a itself are needed.
struct AmplitudeSlice {
    std::array<ScalarField, 3> a;
    std::array<VectorField2, 3> grad_a;
    double max_dev = 0.0;
};
AmplitudeSlice amplitude_fields(const DirectionFamily& family, double rho,
                                const SymTraceFreeTensor2Field& r_ell,
                                Grid eval_grid);

/// Everything one chart contributes at one time slice, on the eval grid.
struct ChartSlice {
    int l = 0;
    int j = 0;
    double chi = 0.0;
    double dchi = 0.0;
    double rho = 0.0;
    const DirectionFamily* family = nullptr;
    VectorField2 disp;                      // D = Phi - x
    std::array<ScalarField, 4> grad_disp;   // d1 D1, d2 D1, d1 D2, d2 D2
    AmplitudeSlice amp;
    std::array<ComplexField, 3> mode;       // U_k = e^{i lambda kp.(x+D)}
    std::array<std::pair<int, int>, 3> shift;  // lambda k_perp (integers)
};

/// Geometry of one stage's assembly.
struct StageGeometry {
    Grid eval_grid;    // where products are formed
    int kcut = 0;      // stored band
    int lambda = 0;    // oscillation frequency, multiple of 5
};

/// Per-slice construction of the perturbation and its oscillatory stress
/// pieces from chart data (flow maps + amplitudes), with a small LRU cache
/// of chart slices. All returned fields live on the eval grid and are NOT
/// band-truncated; callers truncate on storage.
class PerturbationAssembler {
  public:
    PerturbationAssembler(StageGeometry geom, TimePartition partition,
                          std::vector<FlowMap> flows, std::vector<double> rho,
                          const TimeSeries<SymTraceFreeTensor2Field>* r_ell,
                          double admissible_dev);

    const TimePartition& partition() const { return partition_; }
    const StageGeometry& geometry() const { return geom_; }
    const std::vector<double>& rho() const { return rho_; }

    std::shared_ptr<const ChartSlice> chart_slice(int l, int j);

    VectorField2 w_o_slice(int j);
    VectorField2 w_c_slice(int j);
    VectorField2 w_slice(int j);
    /// w rebuilt through the coefficient fields L_kl (representation check).
    VectorField2 w_from_L_slice(int j);
    /// Pressure correction P at slice j. Interaction pairs carry the
    /// product-lemma coefficient (k.k' - 1); the antipodal-pair-free sums
    /// then vanish identically for a single conjugate pair.
    ScalarField pressure_slice(int j);
    /// Oscillatory stress input T1 + T2 at slice j.
    VectorField2 osc_slice(int j);
    /// sum_l chi_l^2 rho_l at time t (spatially constant part of the chart
    /// stress; its divergence vanishes).
    double rho_weight(double t) const;

    /// sup_t |sum chi^2 - 1| on a dense sample (partition diagnostic).
    double partition_defect(int samples = 10000) const;

  private:
    const FlowMap* flow_for(int l) const;

    StageGeometry geom_;
    TimePartition partition_;
    std::vector<FlowMap> flows_;
    std::vector<double> rho_;
    const TimeSeries<SymTraceFreeTensor2Field>* r_ell_;
    double admissible_dev_;
    DirectionFamily fam0_{0}, fam1_{1};

    std::list<std::pair<std::pair<int, int>, std::shared_ptr<const ChartSlice>>>
        cache_;
    std::size_t cache_cap_ = 8;
};

}  // namespace cib
