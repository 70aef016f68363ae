#pragma once

#include <cstddef>
#include <span>

namespace cib::kernels {

/// Runtime switch between the OpenMP kernels and their serial twins.
/// Reductions are block-ordered in both paths, so results are bitwise
/// identical for any thread count.
void set_parallel(bool on);
bool parallel_enabled();

namespace serial {
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);
void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc);
double sup_abs(std::span<const double> x);
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
/// out_c = cos(angle), out_s = sin(angle), elementwise.
void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s);
/// acc += w * 2*Re[(sr + i si) * (cr + i ci)]
void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc);
}  // namespace serial

namespace par {
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);
void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc);
double sup_abs(std::span<const double> x);
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s);
void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc);
}  // namespace par

// Dispatchers honoring set_parallel().
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);
void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc);
double sup_abs(std::span<const double> x);
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s);
void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc);

}  // namespace cib::kernels
