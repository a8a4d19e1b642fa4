#pragma once

#include <stdexcept>
#include <string>

namespace cafl {

/// Malformed configuration or input file. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string msg)
        : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + msg
                                      : source + ": " + msg),
          source_(std::move(source)), line_(line), detail_(std::move(msg)) {}

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    const std::string& detail() const { return detail_; }  // message without location

private:
    std::string source_;
    int line_;  // 1-based; 0 when no line applies
    std::string detail_;
};

/// Numerical failure (eigensolver non-convergence, divergence, singular
/// system). CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Broken internal contract (malformed graph, dimension mismatch). Always a
/// bug in the caller, never a data problem.
class InvariantViolation : public std::logic_error {
public:
    explicit InvariantViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace cafl
