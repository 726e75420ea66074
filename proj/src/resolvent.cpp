#include "relgreen/resolvent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "relgreen/errors.hpp"
#include "relgreen/free_green.hpp"

namespace relgreen {

GreenEvaluator free_evaluator(const ParticleConfig& p) {
    p.validate();
    GreenEvaluator g;
    g.threshold_energy = p.rest_energy();
    g.eval = [p](double x_b, double x_a, Complex E) {
        return free_amplitude_1d(x_b, x_a, E, p);
    };
    return g;
}

GreenEvaluator constant_evaluator(double v0, const ParticleConfig& p) {
    p.validate();
    GreenEvaluator g;
    g.threshold_energy = p.rest_energy() + v0;
    g.eval = [p, v0](double x_b, double x_a, Complex E) {
        return free_amplitude_1d(x_b, x_a, E - v0, p);
    };
    return g;
}

namespace {

using State = std::array<Complex, 2>; // (u, u')

// u'' = q(x) u with q = (2M/hbar^2) [ Mc^2/2 - (E - V(x))^2 / 2Mc^2 ].
struct EffectiveOde {
    const Potential* V;
    Complex E;
    double mc2;
    double pref; // 2M/hbar^2

    Complex q_at(double x) const {
        const Complex ev = E - (*V)(x);
        return pref * (0.5 * mc2 - ev * ev / (2.0 * mc2));
    }
    void operator()(const State& y, State& dy, double x) const {
        dy[0] = y[1];
        dy[1] = q_at(x) * y[0];
    }
};

// Principal square root with exact-zero imaginary parts pinned to +0, so
// real arguments on the negative axis map to +i|k|.
Complex principal_sqrt(Complex z) {
    if (z.imag() == 0.0) z = Complex(z.real(), +0.0);
    return std::sqrt(z);
}

// One homogeneous solution carried as u = v exp(s), v kept near O(1).
struct ScaledSolution {
    Complex v{1.0, 0.0};
    Complex dv{0.0, 0.0};
    double log_scale = 0.0;
};

// March one solution from x0 to x1 (either direction), renormalizing the
// exponentially growing state into the log bookkeeping along the way.
void integrate_segment(const EffectiveOde& ode, ScaledSolution& sol, double x0,
                       double x1, double rel_tol, double deriv_unit) {
    namespace oi = boost::numeric::odeint;
    if (x0 == x1) return;
    auto stepper = oi::make_controlled(1e-14, rel_tol, oi::runge_kutta_dopri5<State>());
    State y{sol.v, sol.dv};
    double x = x0;
    const double dir = (x1 > x0) ? 1.0 : -1.0;
    double dx = dir * std::min(0.1, std::abs(x1 - x0));
    long steps = 0;
    while (dir * (x1 - x) > 0.0) {
        if (dir * (x + dx - x1) > 0.0) dx = x1 - x;
        if (stepper.try_step(ode, y, x, dx) == oi::success) {
            const double m = std::max(std::abs(y[0]), std::abs(y[1]) / deriv_unit);
            if (m > 1e50) {
                y[0] /= m;
                y[1] /= m;
                sol.log_scale += std::log(m);
            }
        }
        if (++steps > 5000000)
            throw std::runtime_error("resolvent_1d: integrator failed to traverse a segment");
    }
    sol.v = y[0];
    sol.dv = y[1];
}

} // namespace

ResolventReport resolvent_1d_report(const Potential& V, Complex E, double x_b,
                                    double x_a, const ParticleConfig& p, double tol) {
    p.validate();
    if (!(tol > 0.0))
        throw std::invalid_argument("resolvent_1d: tol must be positive");
    if (!std::isfinite(x_b) || !std::isfinite(x_a))
        throw std::invalid_argument("resolvent_1d: positions must be finite");
    if (!std::isfinite(E.real()) || !std::isfinite(E.imag()))
        throw std::invalid_argument("resolvent_1d: energy must be finite");

    const double x_lo = std::min(x_b, x_a);
    const double x_hi = std::max(x_b, x_a);
    const double mc2 = p.rest_energy();
    const EffectiveOde ode{&V, E, mc2, 2.0 * p.mass / (p.hbar * p.hbar)};

    // Decay exponents in the two constant asymptotic regions.  Both must
    // have positive real part or the corresponding solution cannot decay.
    auto q_const = [&](double v_asym) {
        const Complex ev = E - v_asym;
        return ode.pref * (0.5 * mc2 - ev * ev / (2.0 * mc2));
    };
    const Complex kap_l = principal_sqrt(q_const(V.asymptotic_left()));
    const Complex kap_r = principal_sqrt(q_const(V.asymptotic_right()));
    const double k_unit = std::max({std::abs(kap_l), std::abs(kap_r), 1e-300});
    if (!(kap_l.real() > 1e-12 * k_unit) || !(kap_r.real() > 1e-12 * k_unit))
        throw NonDecayingSolutionError(
            "resolvent_1d: energy lies in the continuum of an asymptotic region, "
            "no decaying homogeneous solution exists there");

    // Start just inside the constant regions (where the exponential initial
    // data is exact), beyond every breakpoint and both evaluation points.
    const auto& bp = V.breakpoints();
    double left_most = x_lo, right_most = x_hi;
    if (!bp.empty()) {
        left_most = std::min(left_most, bp.front());
        right_most = std::max(right_most, bp.back());
    }
    const double x_start_l = left_most - 0.5 / kap_l.real();
    const double x_start_r = right_most + 0.5 / kap_r.real();

    // Station list: every breakpoint plus the evaluation points, so each
    // integration segment sees a smooth right-hand side.
    std::vector<double> stations;
    stations.push_back(x_start_l);
    for (double b : bp)
        if (b > x_start_l && b < x_start_r) stations.push_back(b);
    stations.push_back(x_lo);
    stations.push_back(x_hi);
    stations.push_back(x_start_r);
    std::sort(stations.begin(), stations.end());
    stations.erase(std::unique(stations.begin(), stations.end()), stations.end());

    const double rel_tol = std::clamp(tol * 1e-2, 1e-13, 1e-6);

    // Left solution: grows to the right, recorded at both eval stations.
    ScaledSolution ul;
    ul.v = 1.0;
    ul.dv = kap_l;
    ScaledSolution ul_lo{}, ul_hi{};
    for (std::size_t i = 0; i + 1 < stations.size(); ++i) {
        integrate_segment(ode, ul, stations[i], stations[i + 1], rel_tol, k_unit);
        if (stations[i + 1] == x_lo) ul_lo = ul;
        if (stations[i + 1] == x_hi) ul_hi = ul;
        if (stations[i + 1] == x_hi) break;
    }
    if (x_start_l == x_lo) ul_lo = ul; // eval point coincides with the start

    // Right solution: grows to the left, recorded at both eval stations.
    ScaledSolution ur;
    ur.v = 1.0;
    ur.dv = -kap_r;
    ScaledSolution ur_lo{}, ur_hi{};
    if (x_start_r == x_hi) ur_hi = ur;
    for (std::size_t i = stations.size(); i-- > 1;) {
        integrate_segment(ode, ur, stations[i], stations[i - 1], rel_tol, k_unit);
        if (stations[i - 1] == x_hi) ur_hi = ur;
        if (stations[i - 1] == x_lo) ur_lo = ur;
        if (stations[i - 1] == x_lo) break;
    }

    if (x_lo == x_hi) {
        ul_hi = ul_lo;
        ur_lo = ur_hi;
    }

    // Wronskian (rescaled) at both stations; it is constant for the exact
    // flow, so the spread is the integrator health figure.
    const Complex wv_lo = ul_lo.dv * ur_lo.v - ul_lo.v * ur_lo.dv;
    const Complex wv_hi = ul_hi.dv * ur_hi.v - ul_hi.v * ur_hi.dv;
    const double s_lo = ul_lo.log_scale + ur_lo.log_scale;
    const double s_hi = ul_hi.log_scale + ur_hi.log_scale;

    const double w_scale =
        std::abs(ul_lo.dv * ur_lo.v) + std::abs(ul_lo.v * ur_lo.dv);
    if (!(std::abs(wv_lo) > 1e-10 * w_scale))
        throw WronskianDegeneracyError(
            "resolvent_1d: homogeneous solutions are numerically proportional "
            "(energy sits on an eigenvalue of the effective operator)");

    ResolventReport rep;
    rep.wronskian_low = wv_lo;
    rep.wronskian_high = wv_hi;
    if (x_lo == x_hi) {
        rep.wronskian_spread = 0.0;
    } else {
        const Complex ratio = (wv_hi / wv_lo) * std::exp(Complex(s_hi - s_lo, 0.0));
        rep.wronskian_spread = std::abs(ratio - 1.0);
    }

    // G = (i hbar^2 / 2Mc) u_l(x_<) u_r(x_>) / [(hbar^2/2M)(u_l' u_r - u_l u_r')]
    //   = (i/c) v_l(x_<) v_r(x_>) exp(s_r(x_>) - s_r(x_<)) / wv_lo,
    // and the exponent is <= 0 because u_r grows toward smaller x.
    const Complex growth = std::exp(Complex(ur_hi.log_scale - ur_lo.log_scale, 0.0));
    rep.value = I * ul_lo.v * ur_hi.v * growth / (p.light_speed * wv_lo);
    return rep;
}

Complex resolvent_1d(const Potential& V, Complex E, double x_b, double x_a,
                     const ParticleConfig& p, double tol) {
    return resolvent_1d_report(V, E, x_b, x_a, p, tol).value;
}

GreenEvaluator resolvent_evaluator(const Potential& V, const ParticleConfig& p,
                                   double tol) {
    p.validate();
    GreenEvaluator g;
    g.threshold_energy =
        p.rest_energy() + std::min(V.asymptotic_left(), V.asymptotic_right());
    g.eval = [V, p, tol](double x_b, double x_a, Complex E) {
        return resolvent_1d(V, E, x_b, x_a, p, tol);
    };
    return g;
}

} // namespace relgreen
