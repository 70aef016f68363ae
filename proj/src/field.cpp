#include "cib/field.hpp"

#include <stdexcept>

namespace cib {

ScalarField ScalarField::from_function(
    Grid g, const std::function<double(double, double)>& f) {
    ScalarField out(g);
    auto v = out.mutable_values();
    for (int iy = 0; iy < g.n; ++iy) {
        const double x2 = g.x2(iy);
        for (int ix = 0; ix < g.n; ++ix)
            v[std::size_t(iy) * g.n + ix] = f(g.x1(ix), x2);
    }
    return out;
}

ScalarField ScalarField::from_spectral(const SpectralField& s) {
    ScalarField out(s.grid);
    fft::inverse(s.grid.n, s.c.data(), out.mutable_values().data());
    return out;
}

SpectralField ScalarField::spectral() const {
    SpectralField s(grid_);
    fft::forward(grid_.n, v_.data(), s.c.data());
    return s;
}

VectorField2::VectorField2(ScalarField a, ScalarField b)
    : u1(std::move(a)), u2(std::move(b)) {
    if (u1.grid() != u2.grid())
        throw std::invalid_argument("VectorField2: components on different grids");
}

SymTraceFreeTensor2Field::SymTraceFreeTensor2Field(ScalarField a, ScalarField b)
    : t11(std::move(a)), t12(std::move(b)) {
    if (t11.grid() != t12.grid())
        throw std::invalid_argument(
            "SymTraceFreeTensor2Field: components on different grids");
}

}  // namespace cib
