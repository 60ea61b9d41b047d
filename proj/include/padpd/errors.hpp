#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace padpd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatch in problem data or operator application.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid solver/algorithm parameters (eta <= 0, safety outside (0,1), rho <= 0 for ADMM, ...).
struct ConfigError : Error {
    using Error::Error;
};

// A function parameter violates its contract (negative curvature, negative lambda).
struct InvalidFunctionError : Error {
    using Error::Error;
};

// The numeric prox oracle exhausted its iteration budget.
struct OracleFailureError : Error {
    using Error::Error;
};

// Power iteration exhausted its budget; carries the best estimate reached.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double estimate)
        : Error(what), best_estimate(estimate) {}
    double best_estimate;
};

// An iterate left the finite range; carries the last finite stacked point.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, Eigen::VectorXd last, std::size_t k)
        : Error(what), last_finite(std::move(last)), at_iteration(k) {}
    Eigen::VectorXd last_finite;
    std::size_t at_iteration;
};

// An ADMM block subproblem has no usable solve route (singular normal
// equations, or non-quadratic objective without orthonormal columns).
struct SubproblemError : Error {
    using Error::Error;
};

// Problem file could not be parsed; message carries a line anchor.
struct ParseError : Error {
    using Error::Error;
};

// Parsed problem violates a structural invariant or a weight-matrix assumption.
struct ValidationError : Error {
    using Error::Error;
};

// random_qp could not produce a verified instance.
struct GeneratorError : Error {
    using Error::Error;
};

}  // namespace padpd
