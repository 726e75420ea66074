#include "relgreen/dk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relgreen/boundary.hpp"
#include "relgreen/errors.hpp"
#include "relgreen/interp.hpp"
#include "relgreen/resolvent.hpp"

namespace relgreen {

// ---------------------------------------------------------------- DkMap ----

DkMap DkMap::identity() {
    DkMap m;
    m.h_ = [](double q) { return q; };
    m.dh_ = [](double) { return 1.0; };
    m.d2h_ = [](double) { return 0.0; };
    m.d3h_ = [](double) { return 0.0; };
    m.analytic_ = true;
    return m;
}

DkMap DkMap::square() { return power(2.0); }

DkMap DkMap::exponential() {
    DkMap m;
    m.h_ = [](double q) { return std::exp(q); };
    m.dh_ = m.h_;
    m.d2h_ = m.h_;
    m.d3h_ = m.h_;
    m.analytic_ = true;
    return m;
}

DkMap DkMap::power(double alpha) {
    if (!std::isfinite(alpha) || alpha == 0.0)
        throw std::invalid_argument("DkMap::power: exponent must be finite and nonzero");
    DkMap m;
    m.h_ = [alpha](double q) { return std::pow(q, alpha); };
    m.dh_ = [alpha](double q) { return alpha * std::pow(q, alpha - 1.0); };
    m.d2h_ = [alpha](double q) {
        return alpha * (alpha - 1.0) * std::pow(q, alpha - 2.0);
    };
    m.d3h_ = [alpha](double q) {
        return alpha * (alpha - 1.0) * (alpha - 2.0) * std::pow(q, alpha - 3.0);
    };
    m.q_lo_ = 0.0;
    m.open_lo_ = true;
    m.analytic_ = true;
    return m;
}

DkMap DkMap::scaled(const DkMap& base, double s) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("DkMap::scaled: scale must be positive and finite");
    DkMap m;
    m.h_ = [base, s](double q) { return base.h(s * q); };
    if (base.dh_) m.dh_ = [base, s](double q) { return s * base.dh(s * q); };
    if (base.d2h_) m.d2h_ = [base, s](double q) { return s * s * base.d2h(s * q); };
    if (base.d3h_) m.d3h_ = [base, s](double q) { return s * s * s * base.d3h(s * q); };
    m.q_lo_ = base.q_lo_ / s;
    m.q_hi_ = base.q_hi_ / s;
    m.open_lo_ = base.open_lo_;
    m.allow_fd_ = base.allow_fd_;
    m.analytic_ = base.analytic_;
    return m;
}

DkMap DkMap::from_closures(Fn h, Fn dh, Fn d2h, Fn d3h, double q_min,
                           double q_max, bool allow_fd) {
    if (!h) throw std::invalid_argument("DkMap: the map function itself is required");
    if (!(q_min < q_max))
        throw std::invalid_argument("DkMap: domain must be a nonempty interval");
    DkMap m;
    m.h_ = std::move(h);
    m.dh_ = std::move(dh);
    m.d2h_ = std::move(d2h);
    m.d3h_ = std::move(d3h);
    m.q_lo_ = q_min;
    m.q_hi_ = q_max;
    m.allow_fd_ = allow_fd;
    m.analytic_ = static_cast<bool>(m.dh_) && static_cast<bool>(m.d2h_) &&
                  static_cast<bool>(m.d3h_);
    return m;
}

DkMap DkMap::from_samples(const std::vector<double>& q, const std::vector<double>& h,
                          bool allow_fd) {
    if (q.size() != h.size() || q.size() < 4)
        throw std::invalid_argument("DkMap::from_samples: need at least four matched samples");
    const bool up = h[1] > h[0];
    for (std::size_t i = 1; i < h.size(); ++i)
        if ((h[i] > h[i - 1]) != up || h[i] == h[i - 1])
            throw std::invalid_argument(
                "DkMap::from_samples: samples must be strictly monotone (the map "
                "has to stay invertible)");
    auto curve = std::make_shared<PchipCurve>(q, h);
    DkMap m;
    m.h_ = [curve](double x) { return curve->value(x); };
    m.dh_ = [curve](double x) { return curve->derivative(x); };
    m.q_lo_ = q.front();
    m.q_hi_ = q.back();
    m.allow_fd_ = allow_fd;
    m.analytic_ = false;
    return m;
}

void DkMap::require_in_domain(double q) const {
    if (!std::isfinite(q) || q < q_lo_ || q > q_hi_ || (open_lo_ && q == q_lo_))
        throw std::domain_error("DkMap: coordinate outside the map's interval");
}

double DkMap::fd_step(double q) const {
    double d = 1e-4 * (std::abs(q) > 0.0 ? std::abs(q) : 1.0);
    // keep the stencil inside a bounded domain
    const double room = 0.45 * (q_hi_ - q_lo_);
    if (std::isfinite(room)) d = std::min(d, room);
    return d;
}

double DkMap::h(double q) const {
    require_in_domain(q);
    return h_(q);
}

double DkMap::dh(double q) const {
    require_in_domain(q);
    if (dh_) return dh_(q);
    if (!allow_fd_)
        throw DerivativeUnavailableError(
            "DkMap: first derivative not provided and finite differences are disabled");
    const double d = fd_step(q);
    const double qp = std::min(q + d, q_hi_), qm = std::max(q - d, q_lo_);
    return (h_(qp) - h_(qm)) / (qp - qm);
}

double DkMap::d2h(double q) const {
    require_in_domain(q);
    if (d2h_) return d2h_(q);
    if (!allow_fd_)
        throw DerivativeUnavailableError(
            "DkMap: second derivative not provided and finite differences are disabled");
    const double d = fd_step(q);
    if (q - d < q_lo_ || q + d > q_hi_)
        throw std::domain_error("DkMap: too close to the domain edge for finite differences");
    if (dh_) return (dh_(q + d) - dh_(q - d)) / (2.0 * d);
    return (h_(q + d) - 2.0 * h_(q) + h_(q - d)) / (d * d);
}

double DkMap::d3h(double q) const {
    require_in_domain(q);
    if (d3h_) return d3h_(q);
    if (!allow_fd_)
        throw DerivativeUnavailableError(
            "DkMap: third derivative not provided and finite differences are disabled");
    const double d = fd_step(q);
    if (q - 2.0 * d < q_lo_ || q + 2.0 * d > q_hi_)
        throw std::domain_error("DkMap: too close to the domain edge for finite differences");
    if (d2h_) return (d2h_(q + d) - d2h_(q - d)) / (2.0 * d);
    if (dh_) return (dh_(q + d) - 2.0 * dh_(q) + dh_(q - d)) / (d * d);
    return (-0.5 * h_(q - 2.0 * d) + h_(q - d) - h_(q + d) + 0.5 * h_(q + 2.0 * d)) /
           (d * d * d);
}

// ------------------------------------------------------------- channels ----

void AngularChannel::validate() const {
    if (l < 0) throw std::invalid_argument("AngularChannel: l must be non-negative");
    if (dim < 2) throw std::invalid_argument("AngularChannel: dimension must be at least 2");
}

double centrifugal_coefficient(const AngularChannel& ch) {
    ch.validate();
    const double nu = ch.l + 0.5 * ch.dim - 1.0;
    return nu * nu - 0.25;
}

// ---------------------------------------------------------- scalar fields ----

double profile_function(const DkMap& map, double q) { return map.dh(q) * map.dh(q); }

double effective_potential(const DkMap& map, double q, double rho,
                           const ParticleConfig& p) {
    p.validate();
    if (!(rho > 0.0)) throw std::invalid_argument("effective_potential: rho must be positive");
    if (map.analytic_derivatives()) {
        const double hp = map.dh(q);
        if (hp == 0.0)
            throw std::domain_error("effective_potential: map derivative vanishes at q");
        const double r3 = map.d3h(q) / hp;
        const double r2 = map.d2h(q) / hp;
        return -rho * p.hbar * p.hbar / p.mass * (0.25 * r3 - 0.375 * r2 * r2);
    }
    if (!map.fd_allowed())
        throw DerivativeUnavailableError(
            "effective_potential: map lacks analytic derivatives and finite "
            "differences are disabled");
    return effective_potential_fd(map, q, rho, p);
}

double effective_potential_fd(const DkMap& map, double q, double rho,
                              const ParticleConfig& p, double step) {
    p.validate();
    if (!(rho > 0.0)) throw std::invalid_argument("effective_potential: rho must be positive");
    map.require_in_domain(q);
    // When h' itself comes from nested differences it carries ~eps/delta
    // noise into u = ln|h'|, which the second difference divides by d^2;
    // a wider outer step keeps that amplification below truncation.
    const double base = map.has_first_derivative() ? 1e-4 : 1e-3;
    const double d = step > 0.0 ? step : base * (std::abs(q) > 0.0 ? std::abs(q) : 1.0);
    if (q - d < map.q_min() || q + d > map.q_max())
        throw std::domain_error(
            "effective_potential: too close to the map boundary for finite differences");
    const double dm = map.dh(q - d), d0 = map.dh(q), dp = map.dh(q + d);
    if (dm == 0.0 || d0 == 0.0 || dp == 0.0 || (dm > 0.0) != (dp > 0.0))
        throw std::domain_error(
            "effective_potential: map derivative vanishes or changes sign near q");
    // u = ln|h'|:  V_eff = -(rho hbar^2/M)(u''/4 - u'^2/8)
    const double um = std::log(std::abs(dm));
    const double u0 = std::log(std::abs(d0));
    const double up = std::log(std::abs(dp));
    const double g1 = (up - um) / (2.0 * d);
    const double g2 = (up - 2.0 * u0 + um) / (d * d);
    return -rho * p.hbar * p.hbar / p.mass * (0.25 * g2 - 0.125 * g1 * g1);
}

// ---------------------------------------------------------- radial action ----

void RadialSlicedPath::validate() const {
    if (q.size() < 2 || q.size() != rho.size())
        throw std::invalid_argument(
            "RadialSlicedPath: need at least two points with matching rho values");
    if (!(eps_s > 0.0) || !std::isfinite(eps_s))
        throw std::invalid_argument("RadialSlicedPath: slice width must be positive");
    for (double r : rho)
        if (!(r > 0.0)) throw std::invalid_argument("RadialSlicedPath: rho must stay positive");
    channel.validate();
}

DkActionTerms dk_radial_action_terms(const RadialSlicedPath& path, const DkMap& map,
                                     const Potential& V, double E,
                                     const ParticleConfig& p) {
    path.validate();
    p.validate();
    if (!std::isfinite(E))
        throw std::invalid_argument("dk_radial_action: energy must be finite and real");
    const double coeff = centrifugal_coefficient(path.channel);
    const double mc2 = p.rest_energy();
    const double eps = path.eps_s;

    DkActionTerms t;
    for (std::size_t n = 1; n < path.q.size(); ++n) {
        const double qn = path.q[n];
        const double rho = path.rho[n];
        const double dq = path.q[n] - path.q[n - 1];
        const double f = profile_function(map, qn);
        const double r = map.h(qn);
        const double v = V(r);

        t.kinetic += 0.5 * p.mass / rho * dq * dq / eps;
        if (coeff != 0.0) {
            if (r == 0.0)
                throw std::domain_error("dk_radial_action: centrifugal term singular at r = 0");
            t.centrifugal += eps * rho * f * (0.5 * p.hbar * p.hbar / p.mass) * coeff / (r * r);
        }
        const double ev = E - v;
        t.energy_mass += eps * rho * f * (0.5 * mc2 - ev * ev / (2.0 * mc2));
        t.effective += eps * effective_potential(map, qn, rho, p);
    }
    return t;
}

double dk_radial_action(const RadialSlicedPath& path, const DkMap& map,
                        const Potential& V, double E, const ParticleConfig& p) {
    return dk_radial_action_terms(path, map, V, E, p).total();
}

// ------------------------------------------------------- radial amplitude ----

Complex radial_wall_amplitude(const Potential& V, Complex E, const AngularChannel& ch,
                              double r_b, double r_a, const ParticleConfig& p,
                              double tol) {
    ch.validate();
    if (centrifugal_coefficient(ch) != 0.0)
        throw UnsupportedChannelError(
            "radial_wall_amplitude: only channels with vanishing centrifugal "
            "coefficient (l=0, D=3) reduce exactly to the 1D wall problem");
    if (!(r_b >= 0.0) || !(r_a >= 0.0))
        throw std::invalid_argument("radial_wall_amplitude: radii must be non-negative");
    const GreenEvaluator g0 = resolvent_evaluator(V.even_extension(), p, tol);
    return wall_amplitude(g0, 0.0, r_b, r_a, E);
}

// ----------------------------------------------------------- partial waves ----

double addition_kernel(int l, int dim, double angle) {
    if (l < 0) throw std::invalid_argument("addition_kernel: l must be non-negative");
    if (!std::isfinite(angle))
        throw std::invalid_argument("addition_kernel: angle must be finite");
    if (dim == 3) {
        const double x = std::clamp(std::cos(angle), -1.0, 1.0);
        return (2.0 * l + 1.0) / (4.0 * M_PI) * std::legendre(static_cast<unsigned>(l), x);
    }
    if (dim == 2) {
        return l == 0 ? 1.0 / (2.0 * M_PI) : std::cos(l * angle) / M_PI;
    }
    throw UnsupportedDimensionError(
        "addition_kernel: closed forms are available for D = 2 and D = 3 only");
}

Complex partial_wave_sum(const std::vector<Complex>& radial, double angle,
                         double r_b, double r_a, int dim) {
    if (dim != 2 && dim != 3)
        throw UnsupportedDimensionError(
            "partial_wave_sum: closed forms are available for D = 2 and D = 3 only");
    if (radial.empty())
        throw std::invalid_argument("partial_wave_sum: need amplitudes for l = 0..l_max");
    if (!(r_b > 0.0) || !(r_a > 0.0))
        throw std::invalid_argument("partial_wave_sum: radii must be positive");
    Complex s{0.0, 0.0};
    for (std::size_t l = 0; l < radial.size(); ++l)
        s += radial[l] * addition_kernel(static_cast<int>(l), dim, angle);
    return std::pow(r_b * r_a, -0.5 * (dim - 1)) * s;
}

} // namespace relgreen
