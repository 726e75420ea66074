#pragma once

#include <functional>
#include <limits>

#include "relgreen/types.hpp"

namespace relgreen {

// Evaluation capability for a base Green function G0(x_b, x_a; E) with its
// declared validity domain: x arguments inside [x_min, x_max], and real
// energies below threshold_energy free of continuum/pole hazards.
// Implementations must be symmetric under x_b <-> x_a and reentrant.
struct GreenEvaluator {
    std::function<Complex(double, double, Complex)> eval;
    double x_min = -std::numeric_limits<double>::infinity();
    double x_max = std::numeric_limits<double>::infinity();
    // Lowest |Re E| at which the underlying amplitude switches from
    // decaying to oscillatory (rest energy shifted by the asymptotic
    // potential).  Box poles live above this value.
    double threshold_energy = std::numeric_limits<double>::infinity();

    Complex operator()(double x_b, double x_a, Complex E) const {
        return eval(x_b, x_a, E);
    }
};

// Free-particle base amplitude (closed form, valid at any finite E away
// from |E| = Mc^2).
GreenEvaluator free_evaluator(const ParticleConfig& p);

// V identically v0: the free amplitude with E replaced by E - v0.
GreenEvaluator constant_evaluator(double v0, const ParticleConfig& p);

} // namespace relgreen
