#pragma once

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "cib/errors.hpp"
#include "cib/field.hpp"
#include "cib/field_ops.hpp"

namespace cib {

/// Rational unit direction with components in fifths: (n1/5, n2/5).
struct Direction {
    int n1 = 0, n2 = 0;

    double x() const { return n1 / 5.0; }
    double y() const { return n2 / 5.0; }
    Direction operator-() const { return {-n1, -n2}; }
    bool operator<(const Direction& o) const {
        return n1 != o.n1 ? n1 < o.n1 : n2 < o.n2;
    }
    bool operator==(const Direction& o) const {
        return n1 == o.n1 && n2 == o.n2;
    }
    /// k_perp = (-k2, k1)
    Direction perp() const { return {-n2, n1}; }
    double dot(const Direction& o) const {
        return (double(n1) * o.n1 + double(n2) * o.n2) / 25.0;
    }
    /// lambda * k, valid only when it lands in Z^2.
    std::pair<int, int> scaled(int lambda) const;
    bool integer_multiple(int lambda) const {
        return (std::int64_t(lambda) * n1) % 5 == 0 &&
               (std::int64_t(lambda) * n2) % 5 == 0;
    }
};

/// One of the two direction families: three unit vectors and their
/// negatives, rational with denominator 5, whose rank-one tensors span the
/// symmetric 2x2 matrices. Family 1 is family 0 rotated by pi/2.
class DirectionFamily {
  public:
    explicit DirectionFamily(int index);

    int index() const { return index_; }
    const std::array<Direction, 3>& plus_set() const { return plus_; }
    std::array<Direction, 6> full_set() const;

    /// Solve R = 2 sum_k c_k (k x k) for c over the plus set; exact 3x3
    /// linear algebra with the inverse precomputed at construction.
    /// Input in (R11, R12, R22) components.
    std::array<double, 3> solve_coefficients(double r11, double r12,
                                             double r22) const;

    /// Rows of the inverse system: c_k = w.(R11,R12,R22).
    const std::array<std::array<double, 3>, 3>& solve_weights() const {
        return weights_;
    }

  private:
    int index_;
    std::array<Direction, 3> plus_;
    std::array<std::array<double, 3>, 3> weights_;
};

/// Smallest |k+k'| over all pairs from both families with k != -k', halved.
double geometric_constant_c0();

/// Largest sampled Frobenius radius around Id at which all solved
/// coefficients stay strictly positive (deterministic direction sample).
double measure_epsilon0(const DirectionFamily& family, int n_dirs = 512);

struct GammaCoefficients {
    std::array<double, 3> gamma;    // gamma_k, k in plus_set order
    std::array<double, 3> gamma_sq; // c_k = gamma_k^2
};

/// Decomposition R = 2 sum gamma_k^2 (k x k) with strictly positive
/// coefficients; throws NonPositiveCoefficient outside the admissible
/// neighborhood of Id.
GammaCoefficients gamma_coefficients(const std::array<double, 3>& r_sym,
                                     const DirectionFamily& family);

/// Scalar coefficient (k.k' - 1) of the pressure produced by one
/// interaction pair of unit-vector stationary modes.
double pair_pressure(const Direction& k, const Direction& kp);

/// Stationary flow from a conjugate-symmetric coefficient set:
/// Psi = sum a_k e^{i lambda k.x}, W = grad_perp(Psi)/lambda
///     = sum a_k i k_perp e^{i lambda k.x},
/// so that div(W x W) = grad(|W|^2/2 + Psi^2/2) holds for every lambda.
/// Requires a_{-k} = conj(a_k) and lambda k in Z^2 for every key.
struct StationaryFlow {
    VectorField2 W;
    ScalarField Psi;
};
StationaryFlow stationary_flow(
    const std::map<Direction, std::complex<double>>& coeffs, int lambda,
    Grid grid);

/// Right inverse of the divergence: symmetric, trace-free, mean-zero
/// tensor T with div T = v - mean(v), via the explicit mode formula.
SymTraceFreeTensor2Field anti_divergence(const VectorField2& v);
/// Same operator fed with ready-made coefficient views.
SymTraceFreeTensor2Field anti_divergence_spectral(const SpectralField& a,
                                                  const SpectralField& b);

/// (sup |anti_divergence(v)|, Hs norm of v); the harness compares
/// lhs <= C * rhs with a calibrated constant.
std::pair<double, double> antidiv_hs_bound_probe(const VectorField2& v,
                                                 double s);

struct DecayTable {
    std::vector<double> lambdas;
    std::vector<double> values;
    double fitted_slope = 0.0;
};

/// |integral a(x) e^{i lambda k.x} dx| per lambda, with a log-log slope fit.
DecayTable stationary_phase_probe(const ScalarField& a, const Direction& k,
                                  const std::vector<int>& lambdas);

/// Oscillatory decay of the anti-divergence: Hoelder-alpha norms of
/// R(a e^{i lambda k.x}) against lambda.
DecayTable antidiv_decay_probe(const ScalarField& a, const Direction& k,
                               const std::vector<int>& lambdas, double alpha);

}  // namespace cib
