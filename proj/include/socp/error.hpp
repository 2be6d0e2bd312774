#pragma once

#include <stdexcept>
#include <string>

namespace socp {

/// Raised when vector or matrix sizes disagree with a cone layout or with each other.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an iterate leaves the cone interior, a pivot or arrowhead block
/// is singular, or iterative refinement diverges.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by text and binary readers on malformed input.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace socp
