#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vup {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Model evaluation produced no usable value (division by zero, NaN, inf).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// A distribution has no representable mass on the grid.
class DegenerateDistribution : public Error {
public:
    using Error::Error;
};

/// Posterior requested for an output bin with zero probability.
class NoSupportError : public Error {
public:
    using Error::Error;
};

/// Malformed model-matrix sidecar or other binary input.
class FormatError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    enum class Kind { lexical, syntax, unbound_variable };

    ParseError(Kind kind, std::size_t position, const std::string& what)
        : Error(what + " at position " + std::to_string(position)),
          kind_(kind), position_(position) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t position() const noexcept { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

}  // namespace vup
