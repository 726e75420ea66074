#pragma once

#include <stdexcept>
#include <string>

namespace relgreen {

// Requested energy sits exactly on the two-branch threshold |E| = M c^2
// where the decay wavenumber vanishes and the free amplitude diverges.
struct ThresholdEnergyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A homogeneous solution that should decay toward its boundary grew
// instead; the resolvent construction cannot be trusted in that state.
struct NonDecayingSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The two homogeneous solutions came out (numerically) linearly dependent,
// so the Wronskian normalization of the resolvent breaks down.  This is the
// signature of evaluating exactly on a bound-state pole.
struct WronskianDegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A constrained amplitude formula divides by a one-sided amplitude (or a
// determinant of them) that is numerically zero; the requested energy sits
// on a pole of the constrained geometry.
struct DivisionDegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pole search failed: a bracketed minimum did not sharpen into a genuine
// zero of the denominator, or refinement did not converge.
struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The sliced propagation was truncated (in grid extent or in total length)
// too aggressively for the requested tolerance.
struct TruncationBoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A coordinate map was asked for derivatives it cannot supply, e.g. third
// derivatives of a tabulated profile with too few samples.
struct DerivativeUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The requested angular channel needs machinery (a genuine centrifugal
// barrier) that the one-dimensional wall reduction cannot provide.
struct UnsupportedChannelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Angular-addition kernels are only implemented for dimensions 2 and 3.
struct UnsupportedDimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A coordinate map's frame matrix is singular at the requested point, so
// the induced metric has no inverse there.
struct SingularJacobianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace relgreen
