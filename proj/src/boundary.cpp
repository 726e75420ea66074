#include "relgreen/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "relgreen/errors.hpp"
#include "relgreen/parallel.hpp"

namespace relgreen {

void BoxGeometry::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("BoxGeometry: walls must be finite");
    if (!(a < b))
        throw std::invalid_argument("BoxGeometry: left wall must lie strictly below right wall");
}

Complex wall_amplitude(const GreenEvaluator& g0, double a, double x_b,
                       double x_a, Complex E) {
    if (!std::isfinite(a) || !std::isfinite(x_b) || !std::isfinite(x_a))
        throw std::invalid_argument("wall_amplitude: positions must be finite");
    if ((x_b - a) * (x_a - a) < 0.0)
        throw std::invalid_argument("wall_amplitude: endpoints must lie on the same side of the wall");

    const Complex g_bxa = g0(x_b, x_a, E);
    const Complex g_bw = g0(x_b, a, E);
    const Complex g_wa = g0(a, x_a, E);
    const Complex g_ww = g0(a, a, E);

    const double scale =
        std::max({std::abs(g_bxa), std::abs(g_bw), std::abs(g_wa)});
    if (!(std::abs(g_ww) > 1e-12 * scale))
        throw DivisionDegeneracyError(
            "wall_amplitude: base amplitude at the wall is negligibly small, "
            "the subtraction formula is degenerate");

    return g_bxa - g_bw * g_wa / g_ww;
}

Complex box_denominator(const GreenEvaluator& g0, const BoxGeometry& box,
                        Complex E) {
    box.validate();
    const Complex gbb = g0(box.b, box.b, E);
    const Complex gba = g0(box.b, box.a, E);
    const Complex gab = g0(box.a, box.b, E);
    const Complex gaa = g0(box.a, box.a, E);
    return gbb * gaa - gba * gab;
}

Complex box_amplitude(const GreenEvaluator& g0, const BoxGeometry& box,
                      double x_b, double x_a, Complex E) {
    box.validate();
    if (!(x_b >= box.a && x_b <= box.b && x_a >= box.a && x_a <= box.b))
        throw std::invalid_argument("box_amplitude: endpoints must lie inside the box");

    const double a = box.a;
    const double b = box.b;
    const Complex gxx = g0(x_b, x_a, E);
    const Complex gxb = g0(x_b, b, E);
    const Complex gxa = g0(x_b, a, E);
    const Complex gbx = g0(b, x_a, E);
    const Complex gbb = g0(b, b, E);
    const Complex gba = g0(b, a, E);
    const Complex gax = g0(a, x_a, E);
    const Complex gab = g0(a, b, E);
    const Complex gaa = g0(a, a, E);

    const Complex det2 = gbb * gaa - gba * gab;
    const double det2_scale = std::abs(gbb * gaa) + std::abs(gba * gab);
    if (!(std::abs(det2) > 1e-12 * det2_scale))
        throw PoleError(
            "box_amplitude: wall-block determinant cancels below 1e-12 of its "
            "term scale, energy sits at or near an eigenvalue");

    // Cofactor expansion along the first row of
    //   | gxx gxb gxa |
    //   | gbx gbb gba |
    //   | gax gab gaa |
    // so that a wall-touching first row cancels pairwise against the others.
    const Complex minor1 = det2;
    const Complex minor2 = gbx * gaa - gba * gax;
    const Complex minor3 = gbx * gab - gbb * gax;
    const Complex det3 = gxx * minor1 - gxb * minor2 + gxa * minor3;

    return det3 / det2;
}

namespace {

// Expected spacing of adjacent denominator zeros in E near energy e_mid,
// from the box dispersion E^2 = (Mc^2)^2 + (hbar c k)^2 with k spacing pi/L.
double expected_level_spacing(const BoxGeometry& box, double e_mid,
                              const ParticleConfig& p, double v_offset) {
    const double mc2 = p.rest_energy();
    const double hc = p.hbar * p.light_speed;
    const double L = box.length();
    const double e_eff = std::max(e_mid - v_offset, mc2 * (1.0 + 1e-12));
    const double k_mid = std::sqrt(std::max(e_eff * e_eff - mc2 * mc2, 0.0)) / hc;
    const double k_eff = std::max(k_mid, M_PI / L);
    return M_PI * hc * hc * k_eff / (L * e_eff);
}

} // namespace

int default_scan_count(const BoxGeometry& box, double e_lo, double e_hi,
                       const ParticleConfig& p, double v_offset) {
    box.validate();
    p.validate();
    if (!(e_lo < e_hi))
        throw std::invalid_argument("default_scan_count: empty energy range");
    const double de = expected_level_spacing(box, 0.5 * (e_lo + e_hi), p, v_offset);
    const double want = std::ceil(64.0 * (e_hi - e_lo) / de);
    return static_cast<int>(std::clamp(want, 64.0, 100000.0));
}

Spectrum find_box_poles(const GreenEvaluator& g0, const BoxGeometry& box,
                        double e_lo, double e_hi, int n_scan, double tol,
                        const ParticleConfig& p, Exec exec) {
    box.validate();
    p.validate();
    if (!(std::isfinite(e_lo) && std::isfinite(e_hi) && e_lo < e_hi))
        throw std::invalid_argument("find_box_poles: need a finite range with e_lo < e_hi");
    if (n_scan < 2)
        throw std::invalid_argument("find_box_poles: need at least two scan points");
    if (!(tol > 0.0))
        throw std::invalid_argument("find_box_poles: tol must be positive");
    const double threshold = std::isfinite(g0.threshold_energy)
                                 ? g0.threshold_energy
                                 : p.rest_energy();
    if (!(e_lo > threshold))
        throw std::invalid_argument(
            "find_box_poles: scan range must lie strictly above the continuum threshold");

    Spectrum out;

    // Uniform scan of |denominator|; cells evaluate independently.
    const std::size_t n = static_cast<std::size_t>(n_scan);
    const double h = (e_hi - e_lo) / static_cast<double>(n - 1);
    std::vector<double> es(n), vals(n);
    parallel_map(n, exec, [&](std::size_t i) {
        es[i] = e_lo + h * static_cast<double>(i);
        vals[i] = std::abs(box_denominator(g0, box, Complex(es[i], 0.0)));
    });

    const double v_offset = threshold - p.rest_energy();
    const double de_exp = expected_level_spacing(box, 0.5 * (e_lo + e_hi), p, v_offset);
    if (h > 0.5 * de_exp) {
        std::ostringstream msg;
        msg << "scan spacing " << h << " exceeds half the expected level spacing "
            << de_exp << "; adjacent zeros may share one scan cell and be missed";
        out.warnings.push_back(msg.str());
    }

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double prev_energy = -1e300;
    double prev_min = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool valley = vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] &&
                            (vals[i] < vals[i - 1] || vals[i] < vals[i + 1]);
        if (!valley) continue;
        const double shoulder = std::max(vals[i - 1], vals[i + 1]);

        // Golden-section shrink of the bracketing interval around the valley.
        double lo = es[i - 1], hi = es[i + 1];
        auto f = [&](double e) {
            return std::abs(box_denominator(g0, box, Complex(e, 0.0)));
        };
        double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
        double fc = f(c), fd = f(d);
        int guard = 0;
        while (hi - lo > tol * std::max(1.0, 0.5 * std::abs(lo + hi)) &&
               ++guard < 500) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = f(d);
            }
        }
        const double e_star = 0.5 * (lo + hi);
        const double f_star = std::min(fc, fd);
        const double width = hi - lo;

        // Genuine-zero gate: a simple zero must have driven |D| far below the
        // valley shoulders (allow for very fine grids where the shoulders are
        // already small via the chord slope estimate).
        const double gate =
            std::max(1e-5 * shoulder, 2.0 * shoulder * width / h);
        if (!(f_star < gate)) {
            std::ostringstream msg;
            msg << "scan valley near E = " << e_star
                << " does not refine to a zero (min |denominator| = " << f_star
                << "); skipped";
            out.warnings.push_back(msg.str());
            continue;
        }

        // Merge refinements that landed on the same zero from adjacent cells.
        if (!out.lines.empty() &&
            e_star - prev_energy < 10.0 * tol * std::max(1.0, std::abs(e_star))) {
            std::ostringstream msg;
            msg << "two scan valleys refined to the same zero near E = " << e_star
                << "; scan grid is likely too coarse";
            out.warnings.push_back(msg.str());
            if (f_star < prev_min) {
                out.lines.back().energy = e_star;
                out.lines.back().residual = width / std::max(1.0, std::abs(e_star));
                prev_energy = e_star;
                prev_min = f_star;
            }
            continue;
        }

        SpectrumLine line;
        line.n = static_cast<int>(out.lines.size()) + 1;
        line.energy = e_star;
        line.residual = width / std::max(1.0, std::abs(e_star));
        out.lines.push_back(line);
        prev_energy = e_star;
        prev_min = f_star;
    }
    return out;
}

} // namespace relgreen
