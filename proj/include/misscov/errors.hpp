#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace misscov {

// Base of every error raised by the library. kind() is a stable short tag
// used in result files and by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MISSCOV_DEFINE_ERROR(Name, tag)                                        \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(tag, what) {}           \
    }

MISSCOV_DEFINE_ERROR(NumericInputError, "numeric_input");
MISSCOV_DEFINE_ERROR(ShapeError, "shape");
MISSCOV_DEFINE_ERROR(NotPositiveDefiniteError, "not_spd");
MISSCOV_DEFINE_ERROR(AsymmetricInputError, "asymmetric");
MISSCOV_DEFINE_ERROR(IncompleteInputError, "incomplete_input");
MISSCOV_DEFINE_ERROR(ConditioningError, "conditioning");
MISSCOV_DEFINE_ERROR(DegenerateEstimateError, "degenerate_estimate");
MISSCOV_DEFINE_ERROR(PoolExhaustedError, "pool_exhausted");
MISSCOV_DEFINE_ERROR(EmptyMaskError, "empty_mask");
MISSCOV_DEFINE_ERROR(UnidentifiableChannelError, "unidentifiable_channel");
MISSCOV_DEFINE_ERROR(InvalidScenarioError, "invalid_scenario");
MISSCOV_DEFINE_ERROR(StratificationError, "stratification");
MISSCOV_DEFINE_ERROR(ApplicabilityError, "applicability");
MISSCOV_DEFINE_ERROR(ConfigError, "config");

#undef MISSCOV_DEFINE_ERROR

// An iterative solver ran out of iterations. Carries the last iterate and the
// residual (or gradient) norm reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::MatrixXd last_iterate, double residual)
        : Error("convergence", what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const Eigen::MatrixXd& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }

private:
    Eigen::MatrixXd last_iterate_;
    double residual_;
};

// Malformed dataset or results file. line/column are 1-based; 0 means the
// position does not apply (e.g. a manifest-level inconsistency).
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what)
        : Error("parse", format(file, line, column, what)),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& file, std::size_t line, std::size_t column,
                              const std::string& what) {
        std::string out = file;
        if (line > 0) {
            out += ":" + std::to_string(line);
            if (column > 0) out += ":" + std::to_string(column);
        }
        return out + ": " + what;
    }

    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

}  // namespace misscov
