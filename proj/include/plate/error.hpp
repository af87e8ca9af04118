#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative method failed to converge. Carries the last iterate so the
/// caller can inspect or reuse it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate, double last_value)
        : Error(what), last_iterate_(std::move(last_iterate)), last_value_(last_value) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double last_value() const noexcept { return last_value_; }

private:
    std::vector<double> last_iterate_;
    double last_value_;
};

/// Configuration could not be parsed or validated.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field = {}, int line = 0)
        : Error(what), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

/// File input/output failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace plate
