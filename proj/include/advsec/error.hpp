#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace advsec {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// A non-finite value (NaN/Inf) reached a public operation.
class InvalidValueError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Parse failure with 1-based row/column position (0 = not applicable).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row = 0, std::size_t column = 0)
        : Error(msg), row(row), column(column) {}
    std::size_t row = 0;
    std::size_t column = 0;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// Training data cannot support the requested model (e.g. a single class).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double final_grad_norm)
        : Error(msg), final_grad_norm(final_grad_norm) {}
    double final_grad_norm = 0.0;
};

/// Gradient query against a model that declared itself gradient-free.
class NotDifferentiableError : public Error {
public:
    using Error::Error;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

/// Non-finite objective during solving; carries the offending iterate.
class NumericalError : public Error {
public:
    NumericalError(const std::string& msg, std::vector<double> iterate)
        : Error(msg), iterate(std::move(iterate)) {}
    std::vector<double> iterate;
};

class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Surrogate sampling collapsed (all sample weights underflow).
class KernelWidthError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration failure; carries the offending field name.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, std::string field = "")
        : Error(msg), field(std::move(field)) {}
    std::string field;
};

}  // namespace advsec
