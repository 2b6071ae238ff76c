#pragma once

#include <stdexcept>
#include <string>

namespace ordbo {

/// Invalid argument or out-of-domain input.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure (factorisation, non-finite gradient, sampler exhaustion).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double jitter = 0.0,
                            std::string parameter = {})
        : std::runtime_error(what), jitter_(jitter), parameter_(std::move(parameter)) {}

    /// Largest jitter attempted before giving up (0 when not a factorisation failure).
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    /// Name of the offending parameter group, if any.
    [[nodiscard]] const std::string& parameter() const noexcept { return parameter_; }

private:
    double jitter_;
    std::string parameter_;
};

/// Broken internal invariant (stale indices, inconsistent caches).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ordbo
