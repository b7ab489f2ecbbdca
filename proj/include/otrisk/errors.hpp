#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace otrisk {

/**
 * Base class for all domain errors. Carries a stable, module-qualified
 * code ("transport/size-mismatch") next to the human-readable message so
 * callers (and the CLI) can emit machine-readable error records.
 */
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidArgument : public Error {
public:
    InvalidArgument(const std::string& module, const std::string& message)
        : Error(module + "/invalid-argument", message) {}
};

class InvalidData : public Error {
public:
    InvalidData(const std::string& module, const std::string& message)
        : Error(module + "/invalid-data", message) {}
};

/// Duplicate or otherwise degenerate points make the potential margin vanish.
class DegenerateConfiguration : public Error {
public:
    DegenerateConfiguration(const std::string& message, long index_a, long index_b)
        : Error("smooth_quantile/degenerate-configuration", message),
          index_a_(index_a), index_b_(index_b) {}

    long index_a() const noexcept { return index_a_; }
    long index_b() const noexcept { return index_b_; }

private:
    long index_a_;
    long index_b_;
};

class InsufficientTailPoints : public Error {
public:
    explicit InsufficientTailPoints(const std::string& message)
        : Error("risk/insufficient-tail-points", message) {}
};

class InsufficientData : public Error {
public:
    InsufficientData(const std::string& module, const std::string& message)
        : Error(module + "/insufficient-data", message) {}
};

/// Quadrature refinement hit its cap before reaching the requested accuracy.
/// The best estimate computed so far is carried along.
class AccuracyNotReached : public Error {
public:
    AccuracyNotReached(const std::string& message, double best_estimate, double error_estimate)
        : Error("volumes/accuracy-not-reached", message),
          best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, long line)
        : Error("io/parse-error", message + " (line " + std::to_string(line) + ")"),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace otrisk
