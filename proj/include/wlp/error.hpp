#pragma once

#include <stdexcept>
#include <string>

namespace wlp {

// Input outside the mathematical domain of an operation (pole, Im z <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A sample point fell outside the region where a sampled function is defined.
class OutOfDomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Request would exceed a hard resource cap (word length, mesh size, ...).
class ResourceError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Iterative method hit its cap; carries the last attained residual.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what + " (last residual " + std::to_string(last_residual) + ")"),
          residual_(last_residual) {}

    double last_residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace wlp
