#pragma once

#include <stdexcept>
#include <string>

namespace crt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A chart operation was asked to work too close to the pole p = (0, -1).
class PoleProximity : public Error {
public:
    using Error::Error;
};

/// A point violates its coordinate invariants (off the sphere, non-finite).
class InvalidPoint : public Error {
public:
    using Error::Error;
};

/// Divergence heuristic of the Heisenberg box quadrature fired.
class NonIntegrable : public Error {
public:
    using Error::Error;
};

/// Undersized or otherwise unusable numerical parameters.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Two grid functions (or a grid function and a grid) do not share a grid.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A spectral function was used with a basis it was not built on.
class BasisMismatch : public Error {
public:
    using Error::Error;
};

/// An internal consistency check failed (rank law, quadrature stability, ...).
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Malformed run configuration (CLI / config file).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace crt
