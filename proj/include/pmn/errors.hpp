#pragma once

#include <stdexcept>
#include <string>

namespace pmn {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or image extents that do not agree with an operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Weight bundles or configuration values that are mutually inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Out-of-range argument (segment counts, K, empty inputs).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed file: bad magic, manifest, payload or checksum.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An internal invariant was broken by a caller upstream.
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace pmn
