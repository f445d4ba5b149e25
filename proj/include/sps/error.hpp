#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sps {

/// Machine-readable failure categories. The names are written verbatim into
/// run manifests, so treat them as part of the file format.
enum class ErrorCode {
    invalid_argument,
    empty_interior,
    grid_mismatch,
    non_finite,
    no_convergence,
    degenerate_ray,
    not_converged,
    tail_too_large,
    zero_field,
    radius_too_large,
    outside_inner_set,
    config_error,
    io_error,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::empty_interior: return "EmptyInterior";
        case ErrorCode::grid_mismatch: return "GridMismatch";
        case ErrorCode::non_finite: return "NonFinite";
        case ErrorCode::no_convergence: return "NoConvergence";
        case ErrorCode::degenerate_ray: return "DegenerateRay";
        case ErrorCode::not_converged: return "NotConverged";
        case ErrorCode::tail_too_large: return "TailTooLarge";
        case ErrorCode::zero_field: return "ZeroField";
        case ErrorCode::radius_too_large: return "RadiusTooLarge";
        case ErrorCode::outside_inner_set: return "OutsideInnerSet";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the iterative linear solvers; carries the last relative residual.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, double residual, int iterations)
        : Error(ErrorCode::no_convergence, what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

} // namespace sps
