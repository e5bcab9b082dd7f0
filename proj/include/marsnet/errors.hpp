#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marsnet {

/// Input outside an operation's mathematical domain (non-finite value, empty data, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Shapes or indices that do not fit together.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line` is 1-based, 0 when the problem is not tied to a line.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), detail_(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    /// Message without the line prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
};

/// Training produced a non-finite loss or parameter.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), detail_(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }
    /// Message without the epoch suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t epoch_;
};

}  // namespace marsnet

namespace marsnet {

/// Bad command-line flag or configuration value.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace marsnet
