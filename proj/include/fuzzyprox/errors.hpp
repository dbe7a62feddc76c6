#pragma once

#include <stdexcept>
#include <string>

namespace fuzzyprox {

/// Thrown when an argument is outside its documented range (n < 1, bad dims, ...).
struct invalid_parameter : std::invalid_argument {
    explicit invalid_parameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when operand dimensions are inconsistent with each other.
struct dimension_mismatch : std::invalid_argument {
    explicit dimension_mismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a quadrature grid cannot support the requested polynomial degree.
struct unsupported_degree : std::domain_error {
    explicit unsupported_degree(const std::string& what) : std::domain_error(what) {}
};

/// Thrown when an amalgam pivot has zero product d0*e0.
struct degenerate_amalgam : std::runtime_error {
    explicit degenerate_amalgam(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a purported state fails positivity or normalization.
struct non_state : std::invalid_argument {
    explicit non_state(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace fuzzyprox
