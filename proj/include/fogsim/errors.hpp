#pragma once

#include <stdexcept>
#include <string>

namespace fogsim {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input text (scene/config files, image headers).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates an invariant. The message names the field.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string &what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Inconsistent job or stage configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fogsim
