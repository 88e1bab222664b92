#ifndef LWS_ERRORS_HPP
#define LWS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lws {

// Physics formula evaluated outside its domain (singular or undefined).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A configuration or input value violates a documented precondition.
// field() names the offending field so callers can report it.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// An estimator could not produce a result. reason() is a stable,
// machine-readable code such as "insufficient_samples".
class EstimationError : public std::runtime_error {
public:
    EstimationError(std::string reason, const std::string& message)
        : std::runtime_error(message), reason_(std::move(reason)) {}

    const std::string& reason() const noexcept { return reason_; }

private:
    std::string reason_;
};

class NoSpectralPeak : public EstimationError {
public:
    explicit NoSpectralPeak(const std::string& message)
        : EstimationError("no_spectral_peak", message) {}
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lws

#endif  // LWS_ERRORS_HPP
