#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace firenet {

// Base for all library errors. `code()` is a stable machine-readable
// identifier; the CLI maps it into error JSON on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message,
                             std::vector<std::string> violations = {})
        : Error("validation", message), violations_(std::move(violations)) {}

    // Every violation found, not just the first.
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("parse", message + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ZeroRowError : public Error {
public:
    explicit ZeroRowError(std::vector<std::size_t> banks)
        : Error("zero_row", describe(banks)), banks_(std::move(banks)) {}

    const std::vector<std::size_t>& banks() const noexcept { return banks_; }

private:
    static std::string describe(const std::vector<std::size_t>& banks) {
        std::string msg = "bank(s) with zero total holdings:";
        for (auto b : banks) msg += " " + std::to_string(b);
        return msg;
    }
    std::vector<std::size_t> banks_;
};

class InconsistentSheetError : public Error {
public:
    explicit InconsistentSheetError(const std::string& message)
        : Error("inconsistent_sheet", message) {}
};

class InfeasibleSupportError : public Error {
public:
    InfeasibleSupportError(const std::string& message, double residual)
        : Error("infeasible_support", message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class MaxIterExceeded : public Error {
public:
    MaxIterExceeded(const std::string& message, double last_residual)
        : Error("max_iter_exceeded", message), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, std::vector<double> residual_trace)
        : Error("convergence", message), residual_trace_(std::move(residual_trace)) {}

    const std::vector<double>& residual_trace() const noexcept { return residual_trace_; }

private:
    std::vector<double> residual_trace_;
};

class InvalidStrengthError : public Error {
public:
    explicit InvalidStrengthError(const std::string& message)
        : Error("invalid_strength", message) {}
};

class InfeasibleDegreesError : public Error {
public:
    explicit InfeasibleDegreesError(const std::string& message)
        : Error("infeasible_degrees", message) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& message) : Error("index", message) {}
};

class InsufficientSamplesError : public Error {
public:
    explicit InsufficientSamplesError(const std::string& message)
        : Error("insufficient_samples", message) {}
};

class MissingQuarterError : public Error {
public:
    explicit MissingQuarterError(const std::string& message)
        : Error("missing_quarter", message) {}
};

class TooFewBanksError : public Error {
public:
    explicit TooFewBanksError(const std::string& message)
        : Error("too_few_banks", message) {}
};

class InfeasibleSparsityError : public Error {
public:
    explicit InfeasibleSparsityError(const std::string& message)
        : Error("infeasible_sparsity", message) {}
};

class NonUniformShockError : public Error {
public:
    explicit NonUniformShockError(const std::string& message)
        : Error("non_uniform_shock", message) {}
};

class NonUniformLiquidityError : public Error {
public:
    explicit NonUniformLiquidityError(const std::string& message)
        : Error("non_uniform_liquidity", message) {}
};

}  // namespace firenet
