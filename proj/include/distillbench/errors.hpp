#pragma once

#include <stdexcept>
#include <string>

namespace distillbench {

// Error taxonomy shared by the C++ core and the C API status codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape mismatch between operands; message names both shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A scalar argument outside its documented domain (mu <= 0, q < 1, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Malformed textual input; message carries the line or row number.
class ParseError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration; message lists every offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite value where a finite one is required (diverged training,
// non-finite probe in finite differences, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

// Analysis input that makes a statistic undefined (constant features,
// all-identical columns, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace distillbench
