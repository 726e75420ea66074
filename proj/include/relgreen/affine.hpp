#pragma once

// Sliced-action machinery on an affine coordinate patch: frames e^i_mu from a
// coordinate map x = h(q), the induced metric g = e^T e, the connection
// Gamma_{lk}^m = (e^-1) d_l d_k h and its first-two-index contractions, the
// covariant divergence, and the per-slice action including the drift and
// ordering terms the slicing generates at order hbar and hbar^2.
//
// Everything is evaluated strictly at the post-point of a slice; no midpoint
// option exists.  Dimension is capped at 4 (fixed-size storage, hand-rolled
// pivoted elimination).

#include "relgreen/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace relgreen {

class Potential;

inline constexpr std::size_t kMaxAffineDim = 4;

// Coordinate map x^i = h^i(q) on a box domain in q-space.  Derivatives are
// analytic when supplied, otherwise central finite differences with one
// Richardson refinement (base step 1e-5 of the local coordinate scale).
class CoordinateMap {
public:
    // Fills x[0..D-1] from q[0..D-1].
    using MapFn = std::function<void(const double* q, double* x)>;
    // Fills J[i*D + mu] = d h^i / d q^mu.
    using JacobianFn = std::function<void(const double* q, double* jac)>;
    // Fills H[(i*D + lam)*D + kap] = d^2 h^i / d q^lam d q^kap.
    using HessianFn = std::function<void(const double* q, double* hess)>;

    static CoordinateMap identity(std::size_t dim);
    // (r, theta) -> (r cos theta, r sin theta), domain r > 0.
    static CoordinateMap polar2d();
    static CoordinateMap from_closures(std::size_t dim, MapFn h,
                                       std::vector<double> q_lo,
                                       std::vector<double> q_hi,
                                       JacobianFn jac = nullptr,
                                       HessianFn hess = nullptr);

    std::size_t dimension() const { return dim_; }
    bool analytic_first() const { return static_cast<bool>(jac_); }
    bool analytic_second() const { return static_cast<bool>(hess_); }

    void evaluate(const double* q, double* x) const { h_(q, x); }
    std::vector<double> evaluate(const std::vector<double>& q) const;

    // Throws std::domain_error when q lies outside the domain box.
    void require_in_domain(const double* q) const;
    // Largest finite-difference step usable at q along axis mu (stays inside
    // the domain); zero when the domain is too tight for differencing.
    double fd_room(const double* q, std::size_t mu) const;

    const JacobianFn& jacobian_fn() const { return jac_; }
    const HessianFn& hessian_fn() const { return hess_; }

private:
    CoordinateMap() = default;

    std::size_t dim_ = 0;
    MapFn h_;
    JacobianFn jac_;
    HessianFn hess_;
    std::vector<double> q_lo_, q_hi_;
    std::vector<bool> open_lo_;
};

// Frame matrix e^i_mu = d_mu h^i at a point, row-major e[i*D + mu].
struct Frame {
    std::size_t dim = 0;
    std::array<double, kMaxAffineDim * kMaxAffineDim> e{};
    double det = 0.0;

    double operator()(std::size_t i, std::size_t mu) const { return e[i * dim + mu]; }
};

// Induced metric g = e^T e with its inverse and volume factor sqrt(det g).
struct MetricData {
    std::size_t dim = 0;
    std::array<double, kMaxAffineDim * kMaxAffineDim> g{};
    std::array<double, kMaxAffineDim * kMaxAffineDim> g_inv{};
    double sqrt_g = 0.0;

    double metric(std::size_t mu, std::size_t nu) const { return g[mu * dim + nu]; }
    double inverse(std::size_t mu, std::size_t nu) const { return g_inv[mu * dim + nu]; }
};

// Connection Gamma_{lam kap}^{mu} = e_i^{mu} d_lam d_kap h^i with the two
// contractions over the first pair of indices: the lower-index vector
// T_nu = Gamma_{mu nu}^{mu} and its metric-raised partner S^nu = g^{nu s} T_s.
struct ConnectionData {
    std::size_t dim = 0;
    std::array<double, kMaxAffineDim * kMaxAffineDim * kMaxAffineDim> gamma{};
    std::array<double, kMaxAffineDim> contraction_lower{};   // T_nu
    std::array<double, kMaxAffineDim> contraction_raised{};  // S^nu
    MetricData metric;

    double operator()(std::size_t lam, std::size_t kap, std::size_t mu) const {
        return gamma[(lam * dim + kap) * dim + mu];
    }
};

Frame frame(const CoordinateMap& map, const std::vector<double>& q);
MetricData induced_metric(const Frame& fr);
ConnectionData connection(const CoordinateMap& map, const std::vector<double>& q);

// Samples contravariant components A^mu(q); returns a dim-sized vector.
using VectorFieldSampler =
    std::function<std::vector<double>(const std::vector<double>&)>;
// Scalar sampler over q-space (space-time transformation profile f, scalar
// potential, ...).
using ScalarFieldSampler = std::function<double(const std::vector<double>&)>;

// D_mu A^mu = d_mu A^mu (central differences with the given step) plus the
// contracted-connection term T_lam A^lam.  The sampler provides contravariant
// components.
double covariant_divergence(const VectorFieldSampler& field,
                            const ConnectionData& conn,
                            const std::vector<double>& q, double step);

// Sliced path through the coordinate patch.  rho is carried per point; slice
// n (between q[n] and q[n+1]) draws rho, the map data, the potentials, and f
// from its post-point q[n+1].
struct SlicedPathState {
    std::vector<std::vector<double>> q;  // at least two points
    std::vector<double> rho;             // same length as q, all positive
    double eps_s = 0.0;                  // positive slice width
    VectorFieldSampler vector_potential; // lower components A_mu; may be null
    ScalarFieldSampler scalar_potential; // V(q); may be null (zero)
    Complex energy{0.0, 0.0};
    double charge = 1.0;

    void validate(std::size_t dim) const;
    std::size_t slice_count() const { return q.empty() ? 0 : q.size() - 1; }
};

// Per-slice action pieces; total() is their sum.  Only the gauge coupling is
// complex-valued.
struct SlicedActionTerms {
    Complex kinetic{0.0, 0.0};     // (M / 2 eps rho f) g_{mu nu} dq^mu dq^nu
    Complex drift{0.0, 0.0};       // -(hbar/2) T_nu dq^nu
    Complex contraction{0.0, 0.0}; // eps rho f (hbar^2/8M) T_nu S^nu
    Complex gauge{0.0, 0.0};       // -i (e/c) [A.dq - eps rho f (hbar/2M)(A_nu S^nu + D_mu A^mu)]
    Complex energy{0.0, 0.0};      // -eps rho f (E - V)^2 / 2Mc^2
    Complex mass{0.0, 0.0};        // +eps rho f Mc^2 / 2

    Complex total() const { return kinetic + drift + contraction + gauge + energy + mass; }
};

// Action contribution of slice n (0-based, n < slice_count).  f is the
// space-time transformation profile; a null sampler means f == 1.
SlicedActionTerms sliced_action_term(const SlicedPathState& state, std::size_t n,
                                     const CoordinateMap& map,
                                     const ParticleConfig& p,
                                     const ScalarFieldSampler& f = nullptr);

// Sum of sliced_action_term over all slices.
Complex sliced_action(const SlicedPathState& state, const CoordinateMap& map,
                      const ParticleConfig& p,
                      const ScalarFieldSampler& f = nullptr);

}  // namespace relgreen
