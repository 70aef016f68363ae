// Timing comparison of the OpenMP kernels against their serial twins, plus
// the FFT path against the direct-summation reference at a small size.
#include <chrono>
#include <cstring>
#include <iomanip>
#include <iostream>

#include "cib/field_ops.hpp"
#include "cib/kernels.hpp"
#include "cib/serial_ref.hpp"

using namespace cib;
using clock_type = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::cout << std::left << std::setw(26) << name << std::right
              << std::setw(12) << std::fixed << std::setprecision(3)
              << serial_ms << std::setw(12) << parallel_ms << std::setw(10)
              << std::setprecision(2) << serial_ms / parallel_ms << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const int n = quick ? 128 : 512;
    const int reps = quick ? 3 : 10;
    Grid g(n);
    const std::size_t sz = g.size();

    std::vector<double> a(sz), b(sz), c(sz);
    for (std::size_t i = 0; i < sz; ++i) {
        a[i] = std::sin(0.001 * double(i));
        b[i] = std::cos(0.002 * double(i));
    }
    std::span<const double> sa(a), sb(b);
    std::span<double> sc(c);

    std::cout << "kernel benchmark, N = " << n << " (" << sz << " nodes)\n";
    std::cout << std::left << std::setw(26) << "kernel" << std::right
              << std::setw(12) << "serial ms" << std::setw(12) << "omp ms"
              << std::setw(10) << "speedup" << "\n";

    row("multiply",
        time_ms([&] { kernels::serial::multiply(sa, sb, sc); }, reps),
        time_ms([&] { kernels::par::multiply(sa, sb, sc); }, reps));
    row("axpy", time_ms([&] { kernels::serial::axpy(1.1, sa, sc); }, reps),
        time_ms([&] { kernels::par::axpy(1.1, sa, sc); }, reps));
    row("dot", time_ms([&] { (void)kernels::serial::dot(sa, sb); }, reps),
        time_ms([&] { (void)kernels::par::dot(sa, sb); }, reps));
    row("sup_abs", time_ms([&] { (void)kernels::serial::sup_abs(sa); }, reps),
        time_ms([&] { (void)kernels::par::sup_abs(sa); }, reps));
    row("sincos",
        time_ms([&] { kernels::serial::sincos(sa, sc, std::span<double>(b)); },
                std::max(1, reps / 2)),
        time_ms([&] { kernels::par::sincos(sa, sc, std::span<double>(b)); },
                std::max(1, reps / 2)));

    // deterministic reductions must agree bitwise between twins
    if (kernels::serial::dot(sa, sb) != kernels::par::dot(sa, sb)) {
        std::cerr << "FAIL: serial/parallel dot disagree\n";
        return 1;
    }

    // FFT path against the direct DFT reference at a tiny size
    {
        Grid g16(16);
        ScalarField f = ScalarField::from_function(
            g16, [](double x, double y) { return std::sin(x) + std::cos(2 * y); });
        const double fast =
            time_ms([&] { (void)spectral_derivative(f, 1, 0); }, 5);
        const double slow =
            time_ms([&] { (void)ref::derivative_direct(f, 1, 0); }, 1);
        row("derivative N=16 (fft/dft)", slow, fast);
        ScalarField d1 = spectral_derivative(f, 1, 0);
        ScalarField d2 = ref::derivative_direct(f, 1, 0);
        double worst = 0.0;
        for (std::size_t i = 0; i < d1.values().size(); ++i)
            worst = std::max(worst,
                             std::abs(d1.values()[i] - d2.values()[i]));
        if (worst > 1e-10) {
            std::cerr << "FAIL: fft and direct reference disagree: " << worst
                      << "\n";
            return 1;
        }
    }
    std::cout << "agreement checks passed\n";
    return 0;
}
