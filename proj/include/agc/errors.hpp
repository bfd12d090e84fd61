#pragma once

#include <stdexcept>
#include <string>

namespace agc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inconsistent matrix/vector dimensions or non-finite entries.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// The LP solver exhausted its pivot budget or produced an invalid certificate.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(what) {}
};

/// A request exceeds a documented capability limit (e.g. vertex enumeration size).
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& what) : Error(what) {}
};

/// Malformed or schema-incompatible input file.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

}  // namespace agc
