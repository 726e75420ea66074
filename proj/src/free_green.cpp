#include "relgreen/free_green.hpp"

#include <cmath>

#include "relgreen/errors.hpp"

namespace relgreen {

Complex decay_wavenumber(Complex E, const ParticleConfig& p) {
    p.validate();
    if (!std::isfinite(E.real()) || !std::isfinite(E.imag()))
        throw std::invalid_argument("decay_wavenumber: energy must be finite");
    const double mc2 = p.rest_energy();
    Complex arg = (mc2 - E) * (mc2 + E);
    // For real E the product is real, but rounding can land its zero
    // imaginary part on either side of the branch cut.  Pin exact zeros to
    // +0 so the principal square root gives +i|k| above threshold.
    if (arg.imag() == 0.0) arg = Complex(arg.real(), +0.0);
    return std::sqrt(arg) / (p.hbar * p.light_speed);
}

Complex free_amplitude_1d(double x_b, double x_a, Complex E, const ParticleConfig& p) {
    const Complex kap = decay_wavenumber(E, p);
    if (std::abs(kap) == 0.0)
        throw ThresholdEnergyError(
            "free_amplitude_1d: |E| equals the rest energy, the scale integral diverges");
    const double dx = std::abs(x_b - x_a);
    return I * std::exp(-kap * dx) / (2.0 * p.light_speed * kap);
}

} // namespace relgreen
