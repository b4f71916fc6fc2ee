#pragma once

#include <stdexcept>
#include <string>

namespace hilfer {

/// Base class for all library errors. Every failure mode that callers are
/// expected to handle derives from this, so `catch (const Error&)` is enough
/// at API boundaries (the CLI maps subclasses to exit codes).
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the validated range of an algorithm (argument domain,
/// series reliability range, parameter constraint).
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Evaluation at a pole of a special function.
struct PoleError : Error {
    explicit PoleError(const std::string& what) : Error(what) {}
};

/// Result magnitude exceeds what double can represent (or a configured cap).
struct OverflowError : Error {
    explicit OverflowError(const std::string& what) : Error(what) {}
};

/// A quadrature weight function is invalid (e.g. non-increasing substitution).
struct SingularityError : Error {
    explicit SingularityError(const std::string& what) : Error(what) {}
};

/// An iterative scheme inside an oracle or auxiliary computation failed to
/// settle (distinct from solver non-convergence, which is reported, not thrown).
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& what) : Error(what) {}
};

/// The pointwise implicit relation on an impulse window failed to settle.
struct PointwiseImpulseError : Error {
    explicit PointwiseImpulseError(const std::string& what) : Error(what) {}
};

/// Malformed or inconsistent sampling grid.
struct GridError : Error {
    explicit GridError(const std::string& what) : Error(what) {}
};

/// A certificate was requested for data that does not satisfy its hypothesis.
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

} // namespace hilfer
