#include "cib/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "cib/alloc.hpp"

namespace cib::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex g_mutex;
std::map<int, PlanPair>& plan_table() {
    static std::map<int, PlanPair> t;
    return t;
}

PlanPair& plans_for(int n) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto& table = plan_table();
    auto it = table.find(n);
    if (it != table.end()) return it->second;

    aligned_vector<double> real(std::size_t(n) * n, 0.0);
    aligned_vector<std::complex<double>> spec(spectral_size(n));
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_2d(n, n, real.data(),
                                 reinterpret_cast<fftw_complex*>(spec.data()),
                                 FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_2d(n, n,
                                 reinterpret_cast<fftw_complex*>(spec.data()),
                                 real.data(), FFTW_ESTIMATE);
    auto res = table.emplace(n, p);
    return res.first->second;
}

// Per-thread scratch keyed by n; c2r destroys its input so the caller's
// spectral data is copied here first.
thread_local std::map<int, aligned_vector<std::complex<double>>> t_spec_scratch;
thread_local std::map<int, aligned_vector<double>> t_real_scratch;

}  // namespace

std::size_t spectral_size(int n) { return std::size_t(n) * (n / 2 + 1); }

void warm_plans(int n) { plans_for(n); }

void forward(int n, const double* in, std::complex<double>* out) {
    PlanPair& p = plans_for(n);
    // r2c out-of-place preserves input, but FFTW wants non-const pointers.
    auto& scratch = t_real_scratch[n];
    scratch.assign(in, in + std::size_t(n) * n);
    fftw_execute_dft_r2c(p.fwd, scratch.data(),
                         reinterpret_cast<fftw_complex*>(out));
    const double norm = 1.0 / (double(n) * n);
    const std::size_t m = spectral_size(n);
    for (std::size_t i = 0; i < m; ++i) out[i] *= norm;
}

void inverse(int n, const std::complex<double>* in, double* out) {
    PlanPair& p = plans_for(n);
    auto& scratch = t_spec_scratch[n];
    scratch.assign(in, in + spectral_size(n));
    fftw_execute_dft_c2r(p.inv,
                         reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace cib::fft
