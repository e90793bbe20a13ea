#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (p < 1, alpha < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A user-supplied function produced a non-finite cell integral.
class InvalidFunctionError : public Error {
public:
    using Error::Error;
};

/// Engquist-Osher construction requires A(0) = 0.
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// The grid does not resolve the requested Fourier mode (N <= 2 m0).
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Linear solve hit a (near) zero pivot.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Covariance problem without a well-defined answer.
class IllPosedError : public Error {
public:
    using Error::Error;
};

/// Newton iteration for the implicit stage did not reach the tolerance.
class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& what, double residual, std::size_t iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Wraps a stepper failure with the index of the step (and replica) where it happened.
class StepError : public Error {
public:
    StepError(const std::string& what, std::size_t step, std::size_t replica = 0)
        : Error(what), step_(step), replica_(replica) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t replica() const noexcept { return replica_; }

private:
    std::size_t step_;
    std::size_t replica_;
};

/// Malformed configuration input; carries the offending line (0 if unknown) and field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::string field = {})
        : Error(what), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

}  // namespace sfv
