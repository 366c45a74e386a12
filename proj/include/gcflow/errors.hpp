#pragma once
#include <stdexcept>
#include <string>

namespace gcflow {

// thrown when an eigenvalue vector leaves the admissibility cone of a
// curvature function (or a quotient denominator vanishes)
struct cone_error : std::domain_error {
    explicit cone_error(const std::string& msg) : std::domain_error(msg) {}
};

// stencil touches a cell outside the grid interior
struct stencil_error : std::out_of_range {
    explicit stencil_error(const std::string& msg) : std::out_of_range(msg) {}
};

// bad argument values (step size above the stability bound, eps out of range, ...)
struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// numerical breakdown during stepping; carries the offending linear cell index
struct numeric_error : std::runtime_error {
    long cell = -1;
    numeric_error(const std::string& msg, long cell_) : std::runtime_error(msg), cell(cell_) {}
};

// iterative solve ran out of iterations; carries the last residual
struct solve_error : std::runtime_error {
    double residual = 0.0;
    solve_error(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
};

// malformed or out-of-range configuration input
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gcflow
