#pragma once

#include <vector>

namespace relgreen {

// Nodes and weights of an open quadrature rule on (0, b): no node touches
// either endpoint, so integrable endpoint singularities are handled.
struct QuadratureNodes {
    std::vector<double> x; // ascending
    std::vector<double> w; // positive
};

// Tanh-sinh (double-exponential) rule mapped to (0, b), nodes ascending.
// level sets the mesh 2^-level in the double-exponential variable; the
// error decays roughly like exp(-c 2^level) for integrands analytic on
// (0, b), including ones with integrable endpoint singularities.
QuadratureNodes tanh_sinh_nodes(double b, int level);

} // namespace relgreen
