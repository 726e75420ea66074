#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "relgreen/potential.hpp"
#include "relgreen/types.hpp"

namespace relgreen {

// Invertible radial coordinate substitution r = h(q).  Derivatives come from
// analytic closures when provided; otherwise central finite differences with
// step 1e-4 * |q| fill in (unless the fallback is disabled, in which case
// derivative requests beyond what is available throw
// DerivativeUnavailableError).  h must be strictly monotone on its domain;
// this is enforced where it matters, via an h' != 0 guard at evaluation
// points.
class DkMap {
public:
    using Fn = std::function<double(double)>;

    static DkMap identity();    // h(q) = q on all reals
    static DkMap square();      // h(q) = q^2 on q > 0
    static DkMap exponential(); // h(q) = e^q on all reals
    static DkMap power(double alpha); // h(q) = q^alpha on q > 0
    // h(q) = base.h(s*q), s > 0; derivatives by the chain rule.
    static DkMap scaled(const DkMap& base, double s);
    // User map from closures; dh/d2h/d3h may be null (finite differences
    // fill in when allow_fd).  Domain [q_min, q_max].
    static DkMap from_closures(Fn h, Fn dh, Fn d2h, Fn d3h, double q_min,
                               double q_max, bool allow_fd = true);
    // User map from monotone samples, interpolated by a monotone cubic.  The
    // first derivative comes from the interpolant; the interpolant is only
    // C^1, so second and third derivatives do not exist in a usable sense and
    // the finite-difference fallback stays disabled unless explicitly forced
    // (effective_potential then reports the derivatives as unavailable).
    static DkMap from_samples(const std::vector<double>& q,
                              const std::vector<double>& h,
                              bool allow_fd = false);

    double h(double q) const;
    double dh(double q) const;
    double d2h(double q) const;
    double d3h(double q) const;

    bool analytic_derivatives() const { return analytic_; }
    bool has_first_derivative() const { return static_cast<bool>(dh_); }
    bool fd_allowed() const { return allow_fd_; }
    double q_min() const { return q_lo_; }
    double q_max() const { return q_hi_; }
    // Throws std::domain_error when q lies outside the map's interval.
    void require_in_domain(double q) const;

private:
    DkMap() = default;
    double fd_step(double q) const;

    Fn h_, dh_, d2h_, d3h_;
    double q_lo_ = -1e308, q_hi_ = 1e308;
    bool open_lo_ = false;   // strict lower bound (e.g. q > 0 for powers)
    bool allow_fd_ = true;
    bool analytic_ = false;  // all three derivative closures present
};

// Angular momentum channel in D spatial dimensions.
struct AngularChannel {
    int l = 0;
    int dim = 3;
    void validate() const; // l >= 0, dim >= 2
};

// (l + D/2 - 1)^2 - 1/4; exactly zero for l=0, D=3.
double centrifugal_coefficient(const AngularChannel& ch);

// f(q) = h'(q)^2, the profile entering the transformed action.
double profile_function(const DkMap& map, double q);

// V_eff = -(rho hbar^2 / M) [ (1/4) h'''/h' - (3/8) (h''/h')^2 ].
// Uses analytic derivatives when the map carries them, otherwise the
// finite-difference route below.
double effective_potential(const DkMap& map, double q, double rho,
                           const ParticleConfig& p);

// Finite-difference route for V_eff, needing only h': with u = ln|h'|,
// V_eff = -(rho hbar^2/M) (u''/4 - u'^2/8).  step <= 0 selects the default
// 1e-4 * |q| stencil.
double effective_potential_fd(const DkMap& map, double q, double rho,
                              const ParticleConfig& p, double step = 0.0);

// Sliced radial path: points q_0..q_N with per-point rho, slice width eps_s.
struct RadialSlicedPath {
    std::vector<double> q;
    std::vector<double> rho;
    double eps_s = 0.0;
    AngularChannel channel;
    void validate() const;
};

// The four summed pieces of the transformed radial action; each slice
// contributes with all geometric data at its post-point.
struct DkActionTerms {
    double kinetic = 0.0;     // eps * (M/2 rho) (dq/eps)^2   per slice
    double centrifugal = 0.0; // eps * rho f (hbar^2/2M) coeff / r^2
    double energy_mass = 0.0; // eps * rho f (Mc^2/2 - (E-V)^2/2Mc^2)
    double effective = 0.0;   // eps * V_eff
    double total() const { return kinetic + centrifugal + energy_mass + effective; }
};

DkActionTerms dk_radial_action_terms(const RadialSlicedPath& path, const DkMap& map,
                                     const Potential& V, double E,
                                     const ParticleConfig& p);
double dk_radial_action(const RadialSlicedPath& path, const DkMap& map,
                        const Potential& V, double E, const ParticleConfig& p);

// l=0, D=3 radial amplitude: the half-line problem reduces exactly to the
// 1D Dirichlet wall at r=0 over the even extension of V; computed through
// the very same wall/resolvent code path.  Other channels throw
// UnsupportedChannelError (their centrifugal coefficient is nonzero).
Complex radial_wall_amplitude(const Potential& V, Complex E,
                              const AngularChannel& ch, double r_b, double r_a,
                              const ParticleConfig& p, double tol = 1e-10);

// Closed-form hyperspherical addition kernel W_l(angle):
// D=3: (2l+1)/(4 pi) P_l(cos angle); D=2: 1/(2 pi) for l=0, cos(l angle)/pi
// for l >= 1.  Other dimensions throw UnsupportedDimensionError.
double addition_kernel(int l, int dim, double angle);

// (r_b r_a)^(-(D-1)/2) * sum_l radial[l] * W_l(angle), radial covering
// l = 0..l_max contiguously.
Complex partial_wave_sum(const std::vector<Complex>& radial, double angle,
                         double r_b, double r_a, int dim);

} // namespace relgreen
