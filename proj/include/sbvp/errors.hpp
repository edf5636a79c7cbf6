#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbvp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax error while parsing an expression. Carries the byte offset of the
/// offending token within the source string.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation left the domain of an elementary function (log/sqrt of a
/// non-positive argument, division by zero, overflow to non-finite).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Incompatible grids, dimensions or jet orders.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// ODE integration exceeded the blow-up threshold.
class BlowUpError : public Error {
public:
    using Error::Error;
};

/// The characteristic matrix [B Y] is numerically singular; the problem has
/// no unique solution at this parameter value.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration file or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace sbvp
