#ifndef TWOSTEP_ERRORS_HPP
#define TWOSTEP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twostep {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or input violates its documented constraint. `field()` names
/// the offending parameter so callers can report it verbatim.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Iterative solver ran out of budget; carries the last residual.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double residual)
        : Error(what + " (last residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

/// Observations carry no information about the fitted parameters.
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// Malformed configuration file (syntax or unknown key).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RowError {
    std::size_t row;  // 1-based data row, header excluded
    std::string message;
};

/// Schema violations found while reading an observed dataset; one entry per
/// offending row.
class DatasetError : public Error {
public:
    explicit DatasetError(std::vector<RowError> errors)
        : Error(format(errors)), errors_(std::move(errors)) {}

    const std::vector<RowError>& errors() const noexcept { return errors_; }

private:
    static std::string format(const std::vector<RowError>& errors) {
        std::string out = "dataset has " + std::to_string(errors.size()) + " invalid row(s)";
        for (const auto& e : errors) {
            out += "\n  row " + std::to_string(e.row) + ": " + e.message;
        }
        return out;
    }

    std::vector<RowError> errors_;
};

}  // namespace twostep

#endif  // TWOSTEP_ERRORS_HPP
