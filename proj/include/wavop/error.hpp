#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wavop {

// Bad user input: odd dimension, empty grid, out-of-range exponents.
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (p < 1, 2k >= m, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Non-finite values or a numerical breakdown inside a computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A quadrature or refinement gate failed. The CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& what, double smin)
        : NumericalError(what), smallest_singular_value(smin) {}
    double smallest_singular_value;
};

// Energy tolerance too coarse to separate zero modes from the continuum.
class AmbiguityError : public NumericalError {
public:
    AmbiguityError(const std::string& what, std::vector<double> cands)
        : NumericalError(what), candidates(std::move(cands)) {}
    std::vector<double> candidates;
};

} // namespace wavop
