#pragma once

#include <functional>
#include <memory>
#include <span>

#include "cib/alloc.hpp"
#include "cib/grid.hpp"
#include "cib/spectral.hpp"

namespace cib {

/// Real periodic scalar field on a Grid, stored in physical space.
/// spectral() computes the coefficient view fresh on every call; callers
/// that reuse it bind a local, so no hidden per-field cache can accumulate
/// across long time series.
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(Grid g, double fill = 0.0)
        : grid_(g), v_(g.size(), fill) {}

    static ScalarField from_function(
        Grid g, const std::function<double(double, double)>& f);
    static ScalarField from_spectral(const SpectralField& s);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return {v_.data(), v_.size()}; }
    std::span<double> mutable_values() { return {v_.data(), v_.size()}; }
    double at(int ix, int iy) const {
        return v_[std::size_t(iy) * grid_.n + ix];
    }

    SpectralField spectral() const;

  private:
    Grid grid_;
    aligned_vector<double> v_;
};

/// Two scalar components on a shared grid.
struct VectorField2 {
    ScalarField u1, u2;

    VectorField2() = default;
    explicit VectorField2(Grid g) : u1(g), u2(g) {}
    VectorField2(ScalarField a, ScalarField b);

    const Grid& grid() const { return u1.grid(); }
};

/// Symmetric trace-free 2x2 tensor field: stores T11 and T12, the full
/// tensor being [[T11, T12], [T12, -T11]]. Symmetry and zero trace hold by
/// construction.
struct SymTraceFreeTensor2Field {
    ScalarField t11, t12;

    SymTraceFreeTensor2Field() = default;
    explicit SymTraceFreeTensor2Field(Grid g) : t11(g), t12(g) {}
    SymTraceFreeTensor2Field(ScalarField a, ScalarField b);

    const Grid& grid() const { return t11.grid(); }
};

/// Complex scalar field as a pair of real fields.
struct ComplexField {
    ScalarField re, im;

    ComplexField() = default;
    explicit ComplexField(Grid g) : re(g), im(g) {}

    const Grid& grid() const { return re.grid(); }
};

}  // namespace cib
