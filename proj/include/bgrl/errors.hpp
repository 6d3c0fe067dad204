#pragma once

#include <stdexcept>
#include <string>

namespace bgrl {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or dimension disagreement between tensors.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// A stated precondition was violated by the caller.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(what) {}
};

// Malformed input file (CSV, config, checkpoint).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Bad or out-of-range configuration value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Filesystem / stream failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// A dataset ended up with zero usable samples.
class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& what) : Error(what) {}
};

// An average was requested over an empty class.
class UndefinedAverageError : public Error {
public:
    explicit UndefinedAverageError(const std::string& what) : Error(what) {}
};

} // namespace bgrl
