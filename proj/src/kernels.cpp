#include "cib/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

namespace cib::kernels {

namespace {
std::atomic<bool> g_parallel{true};

constexpr std::size_t kBlocks = 256;

inline std::size_t block_begin(std::size_t n, std::size_t b) {
    return n * b / kBlocks;
}
}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() { return g_parallel.load(); }

// ---------------------------------------------------------------- serial

namespace serial {

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::span<double> x, double a) {
    for (auto& v : x) v *= a;
}

void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * a[i] * b[i];
}

double sup_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double sum(std::span<const double> x) {
    const std::size_t n = x.size();
    double blocks[kBlocks];
    for (std::size_t b = 0; b < kBlocks; ++b) {
        double acc = 0.0;
        const std::size_t e = block_begin(n, b + 1);
        for (std::size_t i = block_begin(n, b); i < e; ++i) acc += x[i];
        blocks[b] = acc;
    }
    double total = 0.0;
    for (std::size_t b = 0; b < kBlocks; ++b) total += blocks[b];
    return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double blocks[kBlocks];
    for (std::size_t blk = 0; blk < kBlocks; ++blk) {
        double acc = 0.0;
        const std::size_t e = block_begin(n, blk + 1);
        for (std::size_t i = block_begin(n, blk); i < e; ++i) acc += a[i] * b[i];
        blocks[blk] = acc;
    }
    double total = 0.0;
    for (std::size_t blk = 0; blk < kBlocks; ++blk) total += blocks[blk];
    return total;
}

void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s) {
    const std::size_t n = angle.size();
    for (std::size_t i = 0; i < n; ++i) {
        out_c[i] = std::cos(angle[i]);
        out_s[i] = std::sin(angle[i]);
    }
}

void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc) {
    const std::size_t n = sr.size();
    for (std::size_t i = 0; i < n; ++i)
        acc[i] += 2.0 * w * (sr[i] * cr[i] - si[i] * ci[i]);
}

}  // namespace serial

// ---------------------------------------------------------------- parallel

namespace par {

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::ptrdiff_t n = std::ptrdiff_t(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::span<double> x, double a) {
    const std::ptrdiff_t n = std::ptrdiff_t(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= a;
}

void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out) {
    const std::ptrdiff_t n = std::ptrdiff_t(a.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc) {
    const std::ptrdiff_t n = std::ptrdiff_t(a.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] += w * a[i] * b[i];
}

double sup_abs(std::span<const double> x) {
    const std::size_t n = x.size();
    double blocks[kBlocks];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(kBlocks); ++b) {
        double m = 0.0;
        const std::size_t e = block_begin(n, b + 1);
        for (std::size_t i = block_begin(n, b); i < e; ++i)
            m = std::max(m, std::abs(x[i]));
        blocks[b] = m;
    }
    double m = 0.0;
    for (std::size_t b = 0; b < kBlocks; ++b) m = std::max(m, blocks[b]);
    return m;
}

double sum(std::span<const double> x) {
    const std::size_t n = x.size();
    double blocks[kBlocks];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(kBlocks); ++b) {
        double acc = 0.0;
        const std::size_t e = block_begin(n, b + 1);
        for (std::size_t i = block_begin(n, b); i < e; ++i) acc += x[i];
        blocks[b] = acc;
    }
    double total = 0.0;
    for (std::size_t b = 0; b < kBlocks; ++b) total += blocks[b];
    return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double blocks[kBlocks];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < std::ptrdiff_t(kBlocks); ++blk) {
        double acc = 0.0;
        const std::size_t e = block_begin(n, blk + 1);
        for (std::size_t i = block_begin(n, blk); i < e; ++i) acc += a[i] * b[i];
        blocks[blk] = acc;
    }
    double total = 0.0;
    for (std::size_t blk = 0; blk < kBlocks; ++blk) total += blocks[blk];
    return total;
}

void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s) {
    const std::ptrdiff_t n = std::ptrdiff_t(angle.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out_c[i] = std::cos(angle[i]);
        out_s[i] = std::sin(angle[i]);
    }
}

void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc) {
    const std::ptrdiff_t n = std::ptrdiff_t(sr.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        acc[i] += 2.0 * w * (sr[i] * cr[i] - si[i] * ci[i]);
}

}  // namespace par

// -------------------------------------------------------------- dispatch

#define CIB_DISPATCH(fn, ...) \
    (parallel_enabled() ? par::fn(__VA_ARGS__) : serial::fn(__VA_ARGS__))

void axpy(double a, std::span<const double> x, std::span<double> y) {
    CIB_DISPATCH(axpy, a, x, y);
}
void scale(std::span<double> x, double a) { CIB_DISPATCH(scale, x, a); }
void multiply(std::span<const double> a, std::span<const double> b,
              std::span<double> out) {
    CIB_DISPATCH(multiply, a, b, out);
}
void multiply_add(std::span<const double> a, std::span<const double> b,
                  double w, std::span<double> acc) {
    CIB_DISPATCH(multiply_add, a, b, w, acc);
}
double sup_abs(std::span<const double> x) { return CIB_DISPATCH(sup_abs, x); }
double sum(std::span<const double> x) { return CIB_DISPATCH(sum, x); }
double dot(std::span<const double> a, std::span<const double> b) {
    return CIB_DISPATCH(dot, a, b);
}
void sincos(std::span<const double> angle, std::span<double> out_c,
            std::span<double> out_s) {
    CIB_DISPATCH(sincos, angle, out_c, out_s);
}
void complex_mac2re(std::span<const double> sr, std::span<const double> si,
                    std::span<const double> cr, std::span<const double> ci,
                    double w, std::span<double> acc) {
    CIB_DISPATCH(complex_mac2re, sr, si, cr, ci, w, acc);
}

#undef CIB_DISPATCH

}  // namespace cib::kernels
