#pragma once

#include <stdexcept>
#include <string>

namespace rmaps {

// Eigensolver failed to reach the requested residual.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual, long iterations)
        : std::runtime_error(what), last_residual(last_residual), iterations(iterations) {}
    double last_residual;
    long iterations;
};

// An orbit passed too close to a discontinuity for the requested tolerance.
class AmbiguityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration file problem, with location information already formatted in.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rmaps
