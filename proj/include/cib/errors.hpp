#pragma once

#include <stdexcept>
#include <string>

namespace cib {

/// Geometric decomposition left the admissible neighborhood of the
/// identity: some solved coefficient c_k = gamma_k^2 was <= 0.
struct NonPositiveCoefficient : std::runtime_error {
    explicit NonPositiveCoefficient(const std::string& what)
        : std::runtime_error(what) {}
};

/// Time stepping would violate the stability guard.
struct StepUnstable : std::runtime_error {
    explicit StepUnstable(const std::string& what) : std::runtime_error(what) {}
};

/// Mollifier radius below grid/time resolution.
struct KernelUnresolved : std::runtime_error {
    explicit KernelUnresolved(const std::string& what)
        : std::runtime_error(what) {}
};

/// Prescribed energy minus current kinetic energy is not positive.
struct NonPositiveEnergyGap : std::runtime_error {
    explicit NonPositiveEnergyGap(const std::string& what)
        : std::runtime_error(what) {}
};

/// A requested wavenumber exceeds what the grid resolves.
struct Unresolved : std::runtime_error {
    explicit Unresolved(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cib
