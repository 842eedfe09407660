#pragma once

#include <stdexcept>
#include <string>

namespace jdlv {

/// Invalid configuration, mismatched dimensions, or malformed input files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a linear solve or time step cannot proceed.
class NumericalBreakdown : public std::runtime_error {
public:
    NumericalBreakdown(const std::string& what, int step)
        : std::runtime_error(what + " (time step " + std::to_string(step) + ")"), step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Price outside the no-arbitrage band; carries the violated bound.
class OutOfRange : public DomainError {
public:
    OutOfRange(const std::string& what, double bound) : DomainError(what), bound_(bound) {}

    double bound() const noexcept { return bound_; }

private:
    double bound_;
};

}  // namespace jdlv
