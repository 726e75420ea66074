#include "relgreen/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace relgreen {

QuadratureNodes tanh_sinh_nodes(double b, int level) {
    if (!(b > 0.0))
        throw std::invalid_argument("tanh_sinh_nodes: upper limit must be positive");
    if (level < 1 || level > 12)
        throw std::invalid_argument("tanh_sinh_nodes: level must lie in [1, 12]");

    const double h = std::ldexp(1.0, -level); // mesh 2^-level
    // Beyond |u| ~ 3.4 the node-to-endpoint distance drops below 1e-17 of
    // the interval and the weight underflows any double computation.
    const double u_max = 3.4;
    const int n_side = static_cast<int>(std::ceil(u_max / h));
    const double half_pi = 1.5707963267948966;

    QuadratureNodes q;
    q.x.reserve(2 * n_side + 1);
    q.w.reserve(2 * n_side + 1);
    for (int k = -n_side; k <= n_side; ++k) {
        const double u = k * h;
        const double t = half_pi * std::sinh(u);
        // x = (b/2)(1 + tanh t) in the cancellation-free exponential form,
        // and sech^2 t likewise, so nodes near 0 keep full precision.
        const double e2 = std::exp(-2.0 * std::abs(t));
        const double sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
        const double x = (t <= 0.0) ? b * e2 / (1.0 + e2) : b / (1.0 + e2);
        const double w = h * b * 0.5 * half_pi * std::cosh(u) * sech2;
        if (!(x > 0.0) || !(x < b) || !(w > 1e-300))
            continue; // underflowed tail node carries nothing
        if (!q.x.empty() && !(x > q.x.back())) {
            // Upper tail saturates in double precision; keep the node list
            // strictly ascending and fold the weight into the last node.
            q.w.back() += w;
            continue;
        }
        q.x.push_back(x);
        q.w.push_back(w);
    }
    return q; // k ran over increasing u, so x is ascending already
}

} // namespace relgreen
