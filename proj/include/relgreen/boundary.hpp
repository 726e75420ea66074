#pragma once

#include <string>
#include <vector>

#include "relgreen/green_evaluator.hpp"
#include "relgreen/types.hpp"

namespace relgreen {

// An interval (a, b) whose endpoints carry Dirichlet walls.
struct BoxGeometry {
    double a = 0.0; // left wall
    double b = 1.0; // right wall

    void validate() const; // throws std::invalid_argument unless finite and a < b
    double length() const { return b - a; }
};

// One bound state extracted from a denominator zero.
struct SpectrumLine {
    int n = 0;            // 1-based index within the scanned window
    double energy = 0.0;  // refined zero of |box denominator|
    double residual = 0.0; // final bracket width / max(1, |energy|)
};

struct Spectrum {
    std::vector<SpectrumLine> lines;      // strictly increasing in energy
    std::vector<std::string> warnings;    // scan-resolution / skipped-valley notes
};

// Amplitude with one impenetrable wall at x = a:
//   G0(x_b,x_a) - G0(x_b,a) G0(a,x_a) / G0(a,a).
// Both endpoints must lie on the same side of the wall (and inside g0's
// domain).  Vanishes identically when either endpoint touches the wall.
// Throws DivisionDegeneracyError when |G0(a,a)| is negligible against the
// other entries.
Complex wall_amplitude(const GreenEvaluator& g0, double a, double x_b,
                       double x_a, Complex E);

// Amplitude confined to (box.a, box.b): ratio of the 3x3 determinant of G0
// values over the 2x2 wall-block determinant, expanded by cofactors along
// the first row so that wall-touching rows cancel structurally.  Throws
// PoleError when the 2x2 denominator cancels below 1e-12 of its own term
// scale (energy at or near an eigenvalue).
Complex box_amplitude(const GreenEvaluator& g0, const BoxGeometry& box,
                      double x_b, double x_a, Complex E);

// The 2x2 denominator G0(b,b)G0(a,a) - G0(b,a)G0(a,b).  Its zeros in E are
// the bound-state energies of the boxed system.
Complex box_denominator(const GreenEvaluator& g0, const BoxGeometry& box,
                        Complex E);

// Default scan resolution for find_box_poles: 64 points per expected level
// spacing at the range midpoint (clamped to [64, 100000]).  v_offset shifts
// the dispersion relation for bases built on a constant potential.
int default_scan_count(const BoxGeometry& box, double e_lo, double e_hi,
                       const ParticleConfig& p, double v_offset = 0.0);

// Scan |box_denominator| on a uniform n_scan-point grid over [e_lo, e_hi],
// bracket every interior valley, and refine each bracket by golden-section
// (bisection-style interval shrinking) until its width falls below
// tol * max(1, |E|).  Valleys that do not refine towards a genuine zero are
// skipped with a warning; a warning is also recorded when the grid is
// coarser than half the expected level spacing.  The scan parallelizes over
// grid cells when exec == Exec::parallel (bitwise-identical results).
Spectrum find_box_poles(const GreenEvaluator& g0, const BoxGeometry& box,
                        double e_lo, double e_hi, int n_scan, double tol,
                        const ParticleConfig& p, Exec exec = Exec::serial);

} // namespace relgreen
