#pragma once

#include <stdexcept>
#include <string>

namespace fracfem {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical method failed to reach its accuracy target.
class EvaluationError : public Error {
public:
    EvaluationError(std::string regime, const std::string& what)
        : Error(what + " [regime: " + regime + "]"), regime_(std::move(regime)) {}

    const std::string& regime() const noexcept { return regime_; }

private:
    std::string regime_;
};

/// A requested configuration is not supported (e.g. 2D standard Galerkin).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// User-supplied configuration failed validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace fracfem
