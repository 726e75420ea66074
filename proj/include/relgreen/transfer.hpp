#pragma once

#include "relgreen/potential.hpp"
#include "relgreen/types.hpp"

namespace relgreen {

// Spatial grid controls for the transfer-matrix oracle.
struct GridSpec {
    double dx = 0.02;    // target spacing; snapped so both endpoints are nodes
    double margin = 0.0; // extent beyond the endpoints; 0 -> auto (8 decay lengths).
                         // Values below 5 decay lengths are rejected.
};

// Slice and L-integration controls.
struct SlicingSpec {
    double eps = 0.1;       // slice width for the lattice part of the L-integral
    double l_max = 0.0;     // upper L cutoff; 0 -> auto from the tail bound
    double l_split = 0.0;   // head/lattice boundary; 0 -> auto (one decay time);
                            // always snapped to a whole number (>= 2) of eps slices
    int level = 5;          // tanh-sinh level for the head integral on (0, l_split]
    double tail_tol = 1e-7; // relative tail budget policing the L truncation
};

struct TransferReport {
    Complex value;              // the amplitude (i hbar / 2Mc) * integral
    double tail_estimate = 0.0; // relative analytic bound on the discarded L-tail
    int grid_points = 0;        // spatial nodes
    long lattice_slices = 0;    // kernel applications spent on the lattice part
    int quad_nodes = 0;         // tanh-sinh nodes in the head integral
    double dx_used = 0.0;
    double margin_used = 0.0;
    double l_max_used = 0.0;
    double l_split_used = 0.0;
};

// Brute-force amplitude: composes the one-slice kernel
//   sqrt(M/2 pi hbar eps) exp(-M dx^2/2 hbar eps) exp(-eps U/hbar),
// with U = Mc^2/2 - (E-V)^2/2Mc^2, on a reflecting spatial grid, integrates
// the resulting L-kernel over (0, l_max] (tanh-sinh head + trapezoid
// lattice) and multiplies by i hbar/2Mc.  Requires E strictly below the
// asymptotic continuum threshold so the integrand decays; throws
// TruncationBoundError when the margin is below five decay lengths, when
// the effective potential is not positive on the grid, or when the L-tail
// bound cannot be brought under tail_tol.
Complex transfer_matrix_amplitude(const Potential& V, Complex E, double x_b,
                                  double x_a, const ParticleConfig& p,
                                  const GridSpec& grid = {},
                                  const SlicingSpec& slicing = {},
                                  Exec exec = Exec::serial);

TransferReport transfer_matrix_report(const Potential& V, Complex E, double x_b,
                                      double x_a, const ParticleConfig& p,
                                      const GridSpec& grid = {},
                                      const SlicingSpec& slicing = {},
                                      Exec exec = Exec::serial);

// Fixed-scale kernel value <x_b| T^n |x_a> at total scale L composed from
// n equal slices (no L-integration).  Exposes the slice-composition engine
// for consistency and benchmark studies.
Complex transfer_fixed_scale(const Potential& V, Complex E, double x_b,
                             double x_a, const ParticleConfig& p,
                             const GridSpec& grid, double L, int n_slices,
                             Exec exec = Exec::serial);

} // namespace relgreen
