#pragma once

#include <stdexcept>
#include <string>

namespace cppe {

/// Input outside the documented domain of an operation.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Simulation configuration that cannot be run as requested (step size, schedule).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text input that could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

    /// Same error with `prefix` (e.g. a file name) in front of the message.
    ParseError with_prefix(const std::string& prefix) const {
        return ParseError(prefix + what(), line_, Raw{});
    }

private:
    struct Raw {};
    ParseError(const std::string& message, int line, Raw) : std::runtime_error(message), line_(line) {}

    int line_;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quantity that is mathematically undefined for the given data (e.g. efficiency with
/// an empty reference).
class UndefinedResult : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cppe
