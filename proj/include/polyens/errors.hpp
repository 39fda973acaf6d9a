#pragma once

#include <stdexcept>
#include <string>

namespace polyens {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument hits a pole of the gamma function.
class PoleError : public Error {
public:
    using Error::Error;
};

/// Argument outside the supported domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive refinement did not reach the requested tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Meijer G parameter block violates its invariants.
class SpecError : public Error {
public:
    using Error::Error;
};

/// Mellin variable outside the fundamental strip.
class StripError : public Error {
public:
    using Error::Error;
};

/// Contour geometry violates a placement constraint.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Truncated unitary model in the degenerate regime l < 2n + nu_1.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// Determinant vanished or the system is too ill-conditioned to use.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Coincident points where distinct points are required.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Two routes for the same quantity disagree beyond tolerance.
class RouteDisagreementError : public Error {
public:
    using Error::Error;
};

/// Non-finite values in a matrix computation.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An inverse factor was numerically singular.
class SingularFactorError : public Error {
public:
    using Error::Error;
};

}  // namespace polyens
