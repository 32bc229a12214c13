#pragma once

#include <stdexcept>
#include <string>

namespace cwrgeom {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
    Io,           ///< file missing, unreadable or unwritable
    Format,       ///< malformed header, bad version, broken transform file
    Consistency,  ///< sizes or ranges that disagree with each other
    Data,         ///< non-finite values, zero-norm vectors, out-of-range scores
    Argument,     ///< caller passed parameters outside an operation's domain
    Precondition, ///< input lacks something the operation needs
    Fit,          ///< transform fitting cannot satisfy its constraints
    Numeric,      ///< an undefined numeric result (e.g. zero rank variance)
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};
class FormatError : public Error {
public:
    explicit FormatError(const std::string& m) : Error(ErrorKind::Format, m) {}
};
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& m) : Error(ErrorKind::Consistency, m) {}
};
class DataError : public Error {
public:
    explicit DataError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& m) : Error(ErrorKind::Argument, m) {}
};
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& m) : Error(ErrorKind::Precondition, m) {}
};
class FitError : public Error {
public:
    explicit FitError(const std::string& m) : Error(ErrorKind::Fit, m) {}
};
class NumericError : public Error {
public:
    explicit NumericError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};

}  // namespace cwrgeom
