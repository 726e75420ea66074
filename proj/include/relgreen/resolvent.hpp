#pragma once

#include "relgreen/green_evaluator.hpp"
#include "relgreen/potential.hpp"
#include "relgreen/types.hpp"

namespace relgreen {

// Diagnostics of one Wronskian-resolvent evaluation.  The Wronskian of the
// two homogeneous solutions is an exact constant of the differential
// equation, so its spread between the two matching stations measures
// integrator health.
struct ResolventReport {
    Complex value{};
    Complex wronskian_low{};   // rescaled Wronskian at the lower station
    Complex wronskian_high{};  // rescaled Wronskian at the upper station
    double wronskian_spread = 0.0; // |W_high/W_low - 1|
};

// Green function of the effective operator
//     -(hbar^2/2M) d^2/dx^2 + Mc^2/2 - (E - V(x))^2 / 2Mc^2
// built from two homogeneous solutions integrated inward from the constant
// asymptotic regions with exact decaying initial data:
//     G = (i hbar^2 / 2Mc) u_left(x_<) u_right(x_>) / W,
//     W = (hbar^2/2M) (u_left' u_right - u_left u_right').
// Log-scale bookkeeping keeps the exponentially growing solutions inside
// double range.  tol bounds the relative integration accuracy.
//
// Throws NonDecayingSolutionError when E lies in the continuum relative to
// an asymptotic region, WronskianDegeneracyError when the two solutions
// come out proportional (E on an eigenvalue of the effective operator).
Complex resolvent_1d(const Potential& V, Complex E, double x_b, double x_a,
                     const ParticleConfig& p, double tol = 1e-10);

ResolventReport resolvent_1d_report(const Potential& V, Complex E, double x_b,
                                    double x_a, const ParticleConfig& p,
                                    double tol = 1e-10);

// GreenEvaluator wrapping resolvent_1d for a fixed potential.
GreenEvaluator resolvent_evaluator(const Potential& V, const ParticleConfig& p,
                                   double tol = 1e-10);

} // namespace relgreen
