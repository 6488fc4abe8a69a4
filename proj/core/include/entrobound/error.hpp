#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace entrobound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression or spec-file text. `offset` is a byte offset into the
/// offending text (or the line number for spec files, see SpecError).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation produced a non-finite value (log/sqrt of a negative, x/0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition (dimension mismatch, bad index, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Integration left the representable regime: |x|_inf > 1e12 or a non-finite derivative.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& message, double time, std::vector<double> initial_state)
        : Error(message), time_(time), initial_state_(std::move(initial_state)) {}

    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] const std::vector<double>& initial_state() const noexcept { return initial_state_; }

private:
    double time_;
    std::vector<double> initial_state_;
};

/// The estimator cannot resolve the requested (eps, T) with the candidate budget.
class ResolutionError : public Error {
public:
    using Error::Error;
};

}  // namespace entrobound
