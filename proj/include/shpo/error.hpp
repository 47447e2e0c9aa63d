#pragma once

#include <stdexcept>
#include <string>

namespace shpo {

enum class ErrorCode {
    invalid_argument = 1,
    dimension_mismatch,
    partition,
    limit_exceeded,
    parse,
    io,
    internal,
};

/// Base exception for the library. Every error carries a code that the
/// C API reports verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what)
        : Error(ErrorCode::dimension_mismatch, what) {}
};

class PartitionError : public Error {
public:
    explicit PartitionError(const std::string& what)
        : Error(ErrorCode::partition, what) {}
};

/// Raised when an enumeration (basis, hypercube scan) would exceed its cap.
class LimitError : public Error {
public:
    explicit LimitError(const std::string& what)
        : Error(ErrorCode::limit_exceeded, what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what)
        : Error(ErrorCode::invalid_argument, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what)
        : Error(ErrorCode::parse, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what)
        : Error(ErrorCode::io, what) {}
};

} // namespace shpo
