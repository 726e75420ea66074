#pragma once

#include <complex>
#include <stdexcept>

namespace relgreen {

using Complex = std::complex<double>;

// Imaginary unit, used all over the amplitude formulas.
inline constexpr Complex I{0.0, 1.0};

// Physical constants of the particle and of the unit system.  Everything in
// the library is expressed through these three numbers, so natural units
// (M = c = hbar = 1) are just the default-constructed config, and the
// nonrelativistic regime is reached by scaling light_speed up.
struct ParticleConfig {
    double mass = 1.0;        // rest mass M
    double light_speed = 1.0; // c
    double hbar = 1.0;        // reduced Planck constant

    // Rest energy M c^2, the threshold scale of the theory.
    double rest_energy() const { return mass * light_speed * light_speed; }

    void validate() const {
        if (!(mass > 0.0) || !(light_speed > 0.0) || !(hbar > 0.0))
            throw std::invalid_argument(
                "ParticleConfig: mass, light_speed and hbar must all be positive");
    }
};

// How a kernel-level computation should execute.  Parallel variants are
// required to produce bitwise-identical results to the serial reference;
// the test suite enforces this.
enum class Exec {
    serial,
    parallel,
};

} // namespace relgreen
