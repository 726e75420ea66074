#include "relgreen/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "relgreen/errors.hpp"
#include "relgreen/parallel.hpp"
#include "relgreen/quadrature.hpp"

namespace relgreen {

namespace {

struct Lattice {
    std::vector<double> x;
    std::vector<Complex> U; // Mc^2/2 - (E-V)^2/2Mc^2 at nodes
    double dx = 0.0;
    double lo = 0.0, hi = 0.0;
    std::size_t ia = 0, ib = 0; // source / sink node indices
    double umin_re = 0.0;       // min Re U over the grid
};

// Node-snapped grid: both endpoints land exactly on nodes, the margin is
// rounded up to whole cells, and potential jumps that fall on a node are
// replaced by the two-sided average.
Lattice build_lattice(const Potential& V, Complex E, double x_b, double x_a,
                      const ParticleConfig& p, double dx_target, double margin) {
    Lattice lat;
    const double xl = std::min(x_a, x_b), xr = std::max(x_a, x_b);
    const double span = xr - xl;
    double dxu = dx_target;
    long n_in = 0;
    if (span > 0.0) {
        n_in = std::max<long>(1, std::llround(span / dx_target));
        dxu = span / static_cast<double>(n_in);
    }
    const long n_marg = static_cast<long>(std::ceil(margin / dxu - 1e-9));
    const long n = n_marg + n_in + n_marg + 1;
    lat.dx = dxu;
    lat.lo = xl - n_marg * dxu;
    lat.hi = lat.lo + (n - 1) * dxu;
    lat.x.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) lat.x[static_cast<std::size_t>(i)] = lat.lo + i * dxu;
    // The slice kernel is symmetric, so the amplitude cannot depend on
    // which endpoint seeds the delta; propagate left-to-right always and
    // endpoint exchange stays bitwise identical.
    lat.ia = static_cast<std::size_t>(n_marg);
    lat.ib = static_cast<std::size_t>(n_marg + n_in);

    std::vector<double> vv(lat.x.size());
    for (std::size_t i = 0; i < lat.x.size(); ++i) vv[i] = V(lat.x[i]);
    for (double bp : V.breakpoints()) {
        const long k = std::lround((bp - lat.lo) / dxu);
        if (k < 0 || k >= n) continue;
        if (std::abs(lat.x[static_cast<std::size_t>(k)] - bp) <= 1e-7 * dxu) {
            const double eta = 1e-9 * std::max(1.0, std::abs(bp));
            vv[static_cast<std::size_t>(k)] = 0.5 * (V(bp - eta) + V(bp + eta));
        }
    }

    const double mc2 = p.rest_energy();
    lat.U.resize(lat.x.size());
    lat.umin_re = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lat.x.size(); ++i) {
        const Complex ev = E - vv[i];
        lat.U[i] = 0.5 * mc2 - ev * ev / (2.0 * mc2);
        lat.umin_re = std::min(lat.umin_re, lat.U[i].real());
    }
    return lat;
}

// One slice of width delta in the symmetric split form
//   T = D^{1/2} G D^{1/2},  D = diag exp(-delta U_i / hbar),
// with G the free Gaussian including single reflections off both grid edges.
struct SliceKernel {
    std::vector<double> g;  // Gaussian at separations k*dx, k = 0..kb
    std::vector<Complex> p; // half-slice potential factors
    long kb = 0;
    double delta = 0.0;
};

SliceKernel make_kernel(const Lattice& lat, double delta, const ParticleConfig& pc) {
    SliceKernel k;
    k.delta = delta;
    const double sigma = std::sqrt(pc.hbar * delta / pc.mass);
    k.kb = std::min<long>(static_cast<long>(lat.x.size()) - 1,
                          static_cast<long>(std::ceil(9.5 * sigma / lat.dx)));
    const double norm = std::sqrt(pc.mass / (2.0 * M_PI * pc.hbar * delta));
    const double alpha = pc.mass / (2.0 * pc.hbar * delta);
    k.g.resize(static_cast<std::size_t>(k.kb) + 1);
    for (long j = 0; j <= k.kb; ++j) {
        const double r = j * lat.dx;
        k.g[static_cast<std::size_t>(j)] = norm * std::exp(-alpha * r * r);
    }
    k.p.resize(lat.U.size());
    for (std::size_t i = 0; i < lat.U.size(); ++i)
        k.p[i] = std::exp(-delta * lat.U[i] / (2.0 * pc.hbar));
    return k;
}

// v <- T v.  Rows are independent; each row sums its band in a fixed order,
// so parallel execution is bitwise identical to serial.
void apply_kernel(const SliceKernel& ker, const Lattice& lat,
                  std::vector<Complex>& v, std::vector<Complex>& pv, Exec exec) {
    const std::size_t n = v.size();
    const long kb = ker.kb;
    const long last2 = 2 * (static_cast<long>(n) - 1);
    parallel_map(n, exec, [&](std::size_t j) { pv[j] = ker.p[j] * v[j]; });
    parallel_map(n, exec, [&](std::size_t ii) {
        const long i = static_cast<long>(ii);
        const long j0 = std::max<long>(0, i - kb);
        const long j1 = std::min<long>(static_cast<long>(n) - 1, i + kb);
        Complex acc{0.0, 0.0};
        for (long j = j0; j <= j1; ++j) {
            double w = ker.g[static_cast<std::size_t>(std::labs(i - j))];
            if (i + j <= kb) w += ker.g[static_cast<std::size_t>(i + j)];
            if (last2 - i - j <= kb) w += ker.g[static_cast<std::size_t>(last2 - i - j)];
            acc += w * pv[j];
        }
        v[ii] = ker.p[ii] * lat.dx * acc;
    });
}

// Continuum kernel entry for a single slice of width delta (no grid sum),
// with the same single-reflection images as the lattice kernel.
Complex direct_entry(const Lattice& lat, double delta, const ParticleConfig& pc) {
    const double norm = std::sqrt(pc.mass / (2.0 * M_PI * pc.hbar * delta));
    const double alpha = pc.mass / (2.0 * pc.hbar * delta);
    auto gauss = [&](double r) { return norm * std::exp(-alpha * r * r); };
    const double xb = lat.x[lat.ib], xa = lat.x[lat.ia];
    const double gsum = gauss(xb - xa) + gauss(xb + xa - 2.0 * lat.lo) +
                        gauss(2.0 * lat.hi - xb - xa);
    const Complex pb = std::exp(-delta * lat.U[lat.ib] / (2.0 * pc.hbar));
    const Complex pa = std::exp(-delta * lat.U[lat.ia] / (2.0 * pc.hbar));
    return pb * gsum * pa;
}

void reset_delta(std::vector<Complex>& v, const Lattice& lat) {
    std::fill(v.begin(), v.end(), Complex{0.0, 0.0});
    v[lat.ia] = 1.0 / lat.dx;
}

void validate_common(Complex E, double x_b, double x_a, const ParticleConfig& p,
                     const GridSpec& grid) {
    p.validate();
    if (!std::isfinite(x_b) || !std::isfinite(x_a))
        throw std::invalid_argument("transfer: positions must be finite");
    if (!std::isfinite(E.real()) || !std::isfinite(E.imag()))
        throw std::invalid_argument("transfer: energy must be finite");
    if (!(grid.dx > 0.0) || !std::isfinite(grid.dx))
        throw std::invalid_argument("transfer: grid spacing must be positive");
    if (grid.margin < 0.0 || !std::isfinite(grid.margin))
        throw std::invalid_argument("transfer: margin must be non-negative");
}

// Asymptotic decay checks shared by both entry points.  Returns the margin
// actually requested (auto: eight decay lengths).
double resolve_margin(const Potential& V, Complex E, const ParticleConfig& p,
                      const GridSpec& grid, double* u_asym_out) {
    const double mc2 = p.rest_energy();
    auto u_of = [&](double v) {
        const Complex ev = E - v;
        return 0.5 * mc2 - ev * ev / (2.0 * mc2);
    };
    const double u_asym =
        std::min(u_of(V.asymptotic_left()).real(), u_of(V.asymptotic_right()).real());
    if (!(u_asym > 0.0))
        throw TruncationBoundError(
            "transfer: energy at or above the asymptotic continuum threshold, "
            "the scale integrand does not decay");
    const double kappa = std::sqrt(2.0 * p.mass * u_asym) / p.hbar;
    const double margin = grid.margin > 0.0 ? grid.margin : 8.0 / kappa;
    if (margin * kappa < 5.0 * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "transfer: grid margin " << margin << " is below five decay lengths ("
            << 5.0 / kappa << "); reflecting truncation would bias the result";
        throw TruncationBoundError(msg.str());
    }
    if (u_asym_out) *u_asym_out = u_asym;
    return margin;
}

} // namespace

TransferReport transfer_matrix_report(const Potential& V, Complex E, double x_b,
                                      double x_a, const ParticleConfig& p,
                                      const GridSpec& grid, const SlicingSpec& slicing,
                                      Exec exec) {
    validate_common(E, x_b, x_a, p, grid);
    if (!(slicing.eps > 0.0) || !std::isfinite(slicing.eps))
        throw std::invalid_argument("transfer: slice width must be positive");
    if (slicing.level < 1 || slicing.level > 12)
        throw std::invalid_argument("transfer: quadrature level must be in [1, 12]");
    if (!(slicing.tail_tol > 0.0))
        throw std::invalid_argument("transfer: tail tolerance must be positive");
    if (slicing.l_max < 0.0 || slicing.l_split < 0.0)
        throw std::invalid_argument("transfer: scale cutoffs must be non-negative");
    if (slicing.l_split > 0.0 && slicing.l_max > 0.0 && slicing.l_split >= slicing.l_max)
        throw std::invalid_argument("transfer: l_split must lie below l_max");

    double u_asym = 0.0;
    const double margin = resolve_margin(V, E, p, grid, &u_asym);
    Lattice lat = build_lattice(V, E, x_b, x_a, p, grid.dx, margin);
    if (!(lat.umin_re > 0.0))
        throw TruncationBoundError(
            "transfer: effective potential is non-positive inside the grid, "
            "the scale integrand may not decay");
    const double rate_grid = lat.umin_re / p.hbar;
    const double rate_asym = u_asym / p.hbar;

    // Head/lattice split point, snapped to a whole number of eps-slices.
    // Commensurability matters: the lattice chain then uses one slice kernel
    // throughout, keeping the composed kernel exactly symmetric (kernels of
    // different widths do not commute once V varies).
    double ls_raw = slicing.l_split;
    if (ls_raw <= 0.0) {
        ls_raw = 1.0 / rate_asym;
        if (slicing.l_max > 0.0) ls_raw = std::min(ls_raw, 0.5 * slicing.l_max);
    }
    const long m_star = std::max<long>(2, std::llround(ls_raw / slicing.eps));
    const double ls = static_cast<double>(m_star) * slicing.eps;
    if (slicing.l_max > 0.0 && ls + 2.0 * slicing.eps > slicing.l_max * (1.0 + 1e-12))
        throw std::invalid_argument(
            "transfer: l_max leaves no room for the lattice part above l_split; "
            "increase l_max or reduce eps");

    TransferReport rep;
    rep.grid_points = static_cast<int>(lat.x.size());
    rep.dx_used = lat.dx;
    rep.margin_used = margin;
    rep.l_split_used = ls;

    std::vector<Complex> v(lat.x.size()), pv(lat.x.size());

    // Head integral over (0, ls]: tanh-sinh absorbs the essential-singular
    // small-L behaviour; every node is resolved by equal sub-slices of width
    // near eps (a single direct continuum entry when one slice suffices).
    const QuadratureNodes nodes = tanh_sinh_nodes(ls, slicing.level);
    rep.quad_nodes = static_cast<int>(nodes.x.size());
    Complex i_head{0.0, 0.0};
    for (std::size_t k = 0; k < nodes.x.size(); ++k) {
        const double L = nodes.x[k];
        const long m = std::max<long>(1, std::llround(L / slicing.eps));
        Complex F;
        if (m == 1) {
            F = direct_entry(lat, L, p);
        } else {
            const SliceKernel ker = make_kernel(lat, L / static_cast<double>(m), p);
            reset_delta(v, lat);
            for (long s = 0; s < m; ++s) apply_kernel(ker, lat, v, pv, exec);
            F = v[lat.ib];
        }
        i_head += nodes.w[k] * F;
    }

    // Lattice part on [ls, l_max]: march the state by eps-slices and apply
    // the trapezoid rule to the kernel samples F(ls + n eps).
    const SliceKernel ker_eps = make_kernel(lat, slicing.eps, p);
    reset_delta(v, lat);
    for (long s = 0; s < m_star; ++s) apply_kernel(ker_eps, lat, v, pv, exec);
    Complex f_prev = v[lat.ib];
    Complex i_lat{0.0, 0.0};
    long steps = 0;
    double tail_rel = std::numeric_limits<double>::infinity();
    const long step_cap = 2000000;
    if (slicing.l_max > 0.0) {
        const long want =
            std::max<long>(2, std::llround((slicing.l_max - ls) / slicing.eps));
        for (long s = 1; s <= want; ++s) {
            apply_kernel(ker_eps, lat, v, pv, exec);
            const Complex f = v[lat.ib];
            i_lat += 0.5 * slicing.eps * (f_prev + f);
            f_prev = f;
        }
        steps = want;
        tail_rel = std::abs(f_prev) / rate_grid /
                   std::max(std::abs(i_head + i_lat), 1e-300);
        if (!(tail_rel <= slicing.tail_tol)) {
            std::ostringstream msg;
            msg << "transfer: tail estimate " << tail_rel
                << " at l_max = " << ls + steps * slicing.eps
                << " exceeds the tolerance " << slicing.tail_tol
                << "; increase l_max";
            throw TruncationBoundError(msg.str());
        }
    } else {
        while (true) {
            apply_kernel(ker_eps, lat, v, pv, exec);
            ++steps;
            const Complex f = v[lat.ib];
            i_lat += 0.5 * slicing.eps * (f_prev + f);
            f_prev = f;
            if (steps >= 2) {
                tail_rel = std::abs(f_prev) / rate_grid /
                           std::max(std::abs(i_head + i_lat), 1e-300);
                if (tail_rel <= 0.5 * slicing.tail_tol) break;
            }
            if (steps > step_cap)
                throw TruncationBoundError(
                    "transfer: tail bound did not reach the tolerance within the "
                    "step cap; the integrand decays too slowly");
        }
    }
    rep.l_max_used = ls + steps * slicing.eps;
    rep.lattice_slices = m_star + steps;
    rep.tail_estimate = tail_rel;
    rep.value = I * p.hbar / (2.0 * p.mass * p.light_speed) * (i_head + i_lat);
    return rep;
}

Complex transfer_matrix_amplitude(const Potential& V, Complex E, double x_b,
                                  double x_a, const ParticleConfig& p,
                                  const GridSpec& grid, const SlicingSpec& slicing,
                                  Exec exec) {
    return transfer_matrix_report(V, E, x_b, x_a, p, grid, slicing, exec).value;
}

Complex transfer_fixed_scale(const Potential& V, Complex E, double x_b, double x_a,
                             const ParticleConfig& p, const GridSpec& grid, double L,
                             int n_slices, Exec exec) {
    validate_common(E, x_b, x_a, p, grid);
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("transfer_fixed_scale: total scale must be positive");
    if (n_slices < 1)
        throw std::invalid_argument("transfer_fixed_scale: need at least one slice");
    const double margin = resolve_margin(V, E, p, grid, nullptr);
    Lattice lat = build_lattice(V, E, x_b, x_a, p, grid.dx, margin);
    std::vector<Complex> v(lat.x.size()), pv(lat.x.size());
    reset_delta(v, lat);
    if (n_slices == 1) return direct_entry(lat, L, p);
    const SliceKernel ker = make_kernel(lat, L / n_slices, p);
    for (int s = 0; s < n_slices; ++s) apply_kernel(ker, lat, v, pv, exec);
    return v[lat.ib];
}

} // namespace relgreen
