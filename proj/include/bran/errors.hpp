#pragma once

#include <stdexcept>
#include <string>

namespace bran {

// Thrown when a computation requires a stable queue (rho < 1) and the
// configuration does not satisfy it.
struct UnstableConfigError : std::runtime_error {
    explicit UnstableConfigError(const std::string& msg)
        : std::runtime_error(msg) {}
};

// Iterative or direct solver failed to reach the requested residual.
struct NonConvergenceError : std::runtime_error {
    explicit NonConvergenceError(const std::string& msg)
        : std::runtime_error(msg) {}
};

// Not enough samples for the requested statistic.
struct TooFewSamplesError : std::runtime_error {
    explicit TooFewSamplesError(const std::string& msg)
        : std::runtime_error(msg) {}
};

}  // namespace bran
