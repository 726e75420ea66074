#pragma once

#include "relgreen/types.hpp"

namespace relgreen {

// kappa = sqrt(M^2 c^4 - E^2) / (hbar c), principal branch: real positive
// below threshold |E| < Mc^2 (decaying amplitude), +i|k| above threshold
// (oscillatory).  Computed from the factored product (Mc^2 - E)(Mc^2 + E)
// so no precision is lost when E sits close to either threshold.
Complex decay_wavenumber(Complex E, const ParticleConfig& p);

// Free fixed-energy amplitude in one dimension,
//     G0(x_b, x_a; E) = i exp(-kappa |x_b - x_a|) / (2 c kappa),
// the closed form of (i hbar / 2Mc) times the scale integral of the free
// heat kernel (a Laplace transform of the Gaussian kernel).  Throws
// ThresholdEnergyError at |E| = Mc^2 where the scale integral diverges.
Complex free_amplitude_1d(double x_b, double x_a, Complex E, const ParticleConfig& p);

} // namespace relgreen
