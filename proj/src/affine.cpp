#include "relgreen/affine.hpp"

#include "relgreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relgreen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Jordan with partial pivoting on the n x n row-major matrix `a`;
// fills `inv` and returns det(a).  A vanishing pivot yields det 0 and an
// unusable inverse -- callers gate on the determinant before trusting it.
double invert_matrix(std::size_t n, const double* a, double* inv) {
    double work[kMaxAffineDim * kMaxAffineDim];
    std::copy(a, a + n * n, work);
    for (std::size_t i = 0; i < n * n; ++i) inv[i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;

    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(work[r * n + col]) > std::abs(work[piv * n + col])) piv = r;
        if (work[piv * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(work[piv * n + c], work[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
            det = -det;
        }
        const double p = work[col * n + col];
        det *= p;
        const double ip = 1.0 / p;
        for (std::size_t c = 0; c < n; ++c) {
            work[col * n + c] *= ip;
            inv[col * n + c] *= ip;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double fac = work[r * n + col];
            if (fac == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                work[r * n + c] -= fac * work[col * n + c];
                inv[r * n + c] -= fac * inv[col * n + c];
            }
        }
    }
    return det;
}

double hadamard_bound(std::size_t n, const double* a) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        prod *= std::sqrt(s);
    }
    return prod;
}

void check_dim(std::size_t dim) {
    if (dim < 1 || dim > kMaxAffineDim)
        throw std::invalid_argument("coordinate map dimension must be 1.." +
                                    std::to_string(kMaxAffineDim));
}

double fd_base_step(double q) { return 1e-5 * std::max(1.0, std::abs(q)); }

}  // namespace

// ---------------------------------------------------------------------------
// CoordinateMap

CoordinateMap CoordinateMap::identity(std::size_t dim) {
    check_dim(dim);
    CoordinateMap m;
    m.dim_ = dim;
    m.h_ = [dim](const double* q, double* x) { std::copy(q, q + dim, x); };
    m.jac_ = [dim](const double* /*q*/, double* jac) {
        for (std::size_t i = 0; i < dim * dim; ++i) jac[i] = 0.0;
        for (std::size_t i = 0; i < dim; ++i) jac[i * dim + i] = 1.0;
    };
    m.hess_ = [dim](const double* /*q*/, double* hess) {
        for (std::size_t i = 0; i < dim * dim * dim; ++i) hess[i] = 0.0;
    };
    m.q_lo_.assign(dim, -kInf);
    m.q_hi_.assign(dim, kInf);
    m.open_lo_.assign(dim, false);
    return m;
}

CoordinateMap CoordinateMap::polar2d() {
    CoordinateMap m;
    m.dim_ = 2;
    m.h_ = [](const double* q, double* x) {
        x[0] = q[0] * std::cos(q[1]);
        x[1] = q[0] * std::sin(q[1]);
    };
    m.jac_ = [](const double* q, double* jac) {
        const double c = std::cos(q[1]), s = std::sin(q[1]);
        jac[0] = c; jac[1] = -q[0] * s;
        jac[2] = s; jac[3] = q[0] * c;
    };
    m.hess_ = [](const double* q, double* hess) {
        const double c = std::cos(q[1]), s = std::sin(q[1]);
        // component x: d2/dr2 = 0, d2/drdth = -s, d2/dth2 = -r c
        hess[0] = 0.0; hess[1] = -s;
        hess[2] = -s;  hess[3] = -q[0] * c;
        // component y
        hess[4] = 0.0; hess[5] = c;
        hess[6] = c;   hess[7] = -q[0] * s;
    };
    m.q_lo_ = {0.0, -kInf};
    m.q_hi_ = {kInf, kInf};
    m.open_lo_ = {true, false};
    return m;
}

CoordinateMap CoordinateMap::from_closures(std::size_t dim, MapFn h,
                                           std::vector<double> q_lo,
                                           std::vector<double> q_hi,
                                           JacobianFn jac, HessianFn hess) {
    check_dim(dim);
    if (!h) throw std::invalid_argument("coordinate map requires component functions");
    if (q_lo.empty()) q_lo.assign(dim, -kInf);
    if (q_hi.empty()) q_hi.assign(dim, kInf);
    if (q_lo.size() != dim || q_hi.size() != dim)
        throw std::invalid_argument("coordinate map domain bounds must match the dimension");
    for (std::size_t i = 0; i < dim; ++i)
        if (!(q_lo[i] < q_hi[i]))
            throw std::invalid_argument("coordinate map domain box is empty");
    CoordinateMap m;
    m.dim_ = dim;
    m.h_ = std::move(h);
    m.jac_ = std::move(jac);
    m.hess_ = std::move(hess);
    m.q_lo_ = std::move(q_lo);
    m.q_hi_ = std::move(q_hi);
    m.open_lo_.assign(dim, false);
    return m;
}

std::vector<double> CoordinateMap::evaluate(const std::vector<double>& q) const {
    if (q.size() != dim_)
        throw std::invalid_argument("coordinate map: point dimension mismatch");
    std::vector<double> x(dim_);
    h_(q.data(), x.data());
    return x;
}

void CoordinateMap::require_in_domain(const double* q) const {
    for (std::size_t i = 0; i < dim_; ++i) {
        const bool below = open_lo_[i] ? (q[i] <= q_lo_[i]) : (q[i] < q_lo_[i]);
        if (below || q[i] > q_hi_[i])
            throw std::domain_error("coordinate map: point outside the domain box (axis " +
                                    std::to_string(i) + ")");
    }
}

double CoordinateMap::fd_room(const double* q, std::size_t mu) const {
    const double lo = q_lo_[mu], hi = q_hi_[mu];
    const double room_lo = std::isinf(lo) ? kInf : q[mu] - lo;
    const double room_hi = std::isinf(hi) ? kInf : hi - q[mu];
    const double room = 0.45 * std::min(room_lo, room_hi);
    return room > 0.0 ? room : 0.0;
}

// ---------------------------------------------------------------------------
// Frame / metric / connection

namespace {

// Central-difference Jacobian column at step d, Richardson-refined with d/2.
void fd_frame(const CoordinateMap& map, const double* q, double* jac) {
    const std::size_t dim = map.dimension();
    double qp[kMaxAffineDim], xp[kMaxAffineDim], xm[kMaxAffineDim];
    std::copy(q, q + dim, qp);
    for (std::size_t mu = 0; mu < dim; ++mu) {
        double d = std::min(fd_base_step(q[mu]), map.fd_room(q, mu));
        if (d <= 0.0)
            throw std::domain_error(
                "coordinate map: point too close to the domain boundary for "
                "finite differences");
        double col[2][kMaxAffineDim];
        for (int pass = 0; pass < 2; ++pass) {
            const double step = pass == 0 ? d : 0.5 * d;
            qp[mu] = q[mu] + step;
            map.evaluate(qp, xp);
            qp[mu] = q[mu] - step;
            map.evaluate(qp, xm);
            qp[mu] = q[mu];
            for (std::size_t i = 0; i < dim; ++i)
                col[pass][i] = (xp[i] - xm[i]) / (2.0 * step);
        }
        for (std::size_t i = 0; i < dim; ++i)
            jac[i * dim + mu] = (4.0 * col[1][i] - col[0][i]) / 3.0;
    }
}

// Second derivatives d_lam d_kap h^i, Richardson-refined central stencils.
void fd_hessian(const CoordinateMap& map, const double* q, double* hess) {
    const std::size_t dim = map.dimension();
    double qp[kMaxAffineDim];
    double h0[kMaxAffineDim], hpp[kMaxAffineDim], hpm[kMaxAffineDim];
    double hmp[kMaxAffineDim], hmm[kMaxAffineDim];
    std::copy(q, q + dim, qp);
    map.evaluate(q, h0);
    double step[kMaxAffineDim];
    for (std::size_t mu = 0; mu < dim; ++mu) {
        step[mu] = std::min(fd_base_step(q[mu]), map.fd_room(q, mu));
        if (step[mu] <= 0.0)
            throw std::domain_error(
                "coordinate map: point too close to the domain boundary for "
                "finite differences");
    }
    for (std::size_t lam = 0; lam < dim; ++lam) {
        for (std::size_t kap = lam; kap < dim; ++kap) {
            double est[2][kMaxAffineDim];
            for (int pass = 0; pass < 2; ++pass) {
                const double dl = (pass == 0 ? 1.0 : 0.5) * step[lam];
                const double dk = (pass == 0 ? 1.0 : 0.5) * step[kap];
                if (lam == kap) {
                    qp[lam] = q[lam] + dl;
                    map.evaluate(qp, hpp);
                    qp[lam] = q[lam] - dl;
                    map.evaluate(qp, hmm);
                    qp[lam] = q[lam];
                    for (std::size_t i = 0; i < dim; ++i)
                        est[pass][i] = (hpp[i] - 2.0 * h0[i] + hmm[i]) / (dl * dl);
                } else {
                    qp[lam] = q[lam] + dl; qp[kap] = q[kap] + dk;
                    map.evaluate(qp, hpp);
                    qp[kap] = q[kap] - dk;
                    map.evaluate(qp, hpm);
                    qp[lam] = q[lam] - dl;
                    map.evaluate(qp, hmm);
                    qp[kap] = q[kap] + dk;
                    map.evaluate(qp, hmp);
                    qp[lam] = q[lam]; qp[kap] = q[kap];
                    for (std::size_t i = 0; i < dim; ++i)
                        est[pass][i] = (hpp[i] - hpm[i] - hmp[i] + hmm[i]) / (4.0 * dl * dk);
                }
            }
            for (std::size_t i = 0; i < dim; ++i) {
                const double v = (4.0 * est[1][i] - est[0][i]) / 3.0;
                hess[(i * dim + lam) * dim + kap] = v;
                hess[(i * dim + kap) * dim + lam] = v;
            }
        }
    }
}

}  // namespace

Frame frame(const CoordinateMap& map, const std::vector<double>& q) {
    const std::size_t dim = map.dimension();
    if (q.size() != dim)
        throw std::invalid_argument("frame: point dimension mismatch");
    map.require_in_domain(q.data());

    Frame fr;
    fr.dim = dim;
    if (map.analytic_first())
        map.jacobian_fn()(q.data(), fr.e.data());
    else
        fd_frame(map, q.data(), fr.e.data());

    double inv[kMaxAffineDim * kMaxAffineDim];
    fr.det = invert_matrix(dim, fr.e.data(), inv);
    if (std::abs(fr.det) <= 1e-12 * hadamard_bound(dim, fr.e.data()))
        throw SingularJacobianError("frame: Jacobian is singular at the evaluation point");
    return fr;
}

MetricData induced_metric(const Frame& fr) {
    const std::size_t dim = fr.dim;
    MetricData md;
    md.dim = dim;
    for (std::size_t mu = 0; mu < dim; ++mu)
        for (std::size_t nu = 0; nu < dim; ++nu) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                s += fr.e[i * dim + mu] * fr.e[i * dim + nu];
            md.g[mu * dim + nu] = s;
        }
    const double detg = invert_matrix(dim, md.g.data(), md.g_inv.data());
    if (detg <= 0.0)
        throw SingularJacobianError("induced_metric: metric is not positive definite");
    md.sqrt_g = std::abs(fr.det);
    return md;
}

ConnectionData connection(const CoordinateMap& map, const std::vector<double>& q) {
    const std::size_t dim = map.dimension();
    const Frame fr = frame(map, q);  // domain + singularity checks live here

    double einv[kMaxAffineDim * kMaxAffineDim];  // einv[mu*dim+i] = (e^-1)^mu_i
    invert_matrix(dim, fr.e.data(), einv);

    double hess[kMaxAffineDim * kMaxAffineDim * kMaxAffineDim];
    if (map.analytic_second())
        map.hessian_fn()(q.data(), hess);
    else
        fd_hessian(map, q.data(), hess);

    ConnectionData cd;
    cd.dim = dim;
    cd.metric = induced_metric(fr);
    for (std::size_t lam = 0; lam < dim; ++lam)
        for (std::size_t kap = 0; kap < dim; ++kap)
            for (std::size_t mu = 0; mu < dim; ++mu) {
                double s = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    s += einv[mu * dim + i] * hess[(i * dim + lam) * dim + kap];
                cd.gamma[(lam * dim + kap) * dim + mu] = s;
            }
    for (std::size_t nu = 0; nu < dim; ++nu) {
        double t = 0.0;
        for (std::size_t mu = 0; mu < dim; ++mu)
            t += cd.gamma[(mu * dim + nu) * dim + mu];
        cd.contraction_lower[nu] = t;
    }
    for (std::size_t nu = 0; nu < dim; ++nu) {
        double s = 0.0;
        for (std::size_t sig = 0; sig < dim; ++sig)
            s += cd.metric.g_inv[nu * dim + sig] * cd.contraction_lower[sig];
        cd.contraction_raised[nu] = s;
    }
    return cd;
}

double covariant_divergence(const VectorFieldSampler& field,
                            const ConnectionData& conn,
                            const std::vector<double>& q, double step) {
    if (!field) throw std::invalid_argument("covariant_divergence: null field sampler");
    if (!(step > 0.0)) throw std::invalid_argument("covariant_divergence: step must be positive");
    const std::size_t dim = conn.dim;
    if (q.size() != dim)
        throw std::invalid_argument("covariant_divergence: point dimension mismatch");

    double div = 0.0;
    std::vector<double> qs = q;
    for (std::size_t mu = 0; mu < dim; ++mu) {
        qs[mu] = q[mu] + step;
        const std::vector<double> ap = field(qs);
        qs[mu] = q[mu] - step;
        const std::vector<double> am = field(qs);
        qs[mu] = q[mu];
        if (ap.size() != dim || am.size() != dim)
            throw std::invalid_argument("covariant_divergence: field sample dimension mismatch");
        div += (ap[mu] - am[mu]) / (2.0 * step);
    }
    const std::vector<double> a0 = field(q);
    for (std::size_t lam = 0; lam < dim; ++lam)
        div += conn.contraction_lower[lam] * a0[lam];
    return div;
}

// ---------------------------------------------------------------------------
// Sliced action

void SlicedPathState::validate(std::size_t dim) const {
    if (q.size() < 2)
        throw std::invalid_argument("sliced path: need at least two points");
    if (rho.size() != q.size())
        throw std::invalid_argument("sliced path: rho must be carried per point");
    for (const auto& pt : q)
        if (pt.size() != dim)
            throw std::invalid_argument("sliced path: point dimension mismatch");
    for (double r : rho)
        if (!(r > 0.0))
            throw std::invalid_argument("sliced path: rho must be positive");
    if (!(eps_s > 0.0))
        throw std::invalid_argument("sliced path: slice width must be positive");
}

SlicedActionTerms sliced_action_term(const SlicedPathState& state, std::size_t n,
                                     const CoordinateMap& map,
                                     const ParticleConfig& p,
                                     const ScalarFieldSampler& f) {
    const std::size_t dim = map.dimension();
    state.validate(dim);
    p.validate();
    if (n + 1 >= state.q.size())
        throw std::out_of_range("sliced_action_term: slice index out of range");

    const std::vector<double>& qpre = state.q[n];
    const std::vector<double>& qpost = state.q[n + 1];
    const double rho = state.rho[n + 1];
    const double fval = f ? f(qpost) : 1.0;
    if (!(fval > 0.0))
        throw std::domain_error("sliced_action_term: transformation profile must be positive");
    const double eps = state.eps_s;
    const double mc2 = p.rest_energy();
    const double erf_weight = eps * rho * fval;

    const ConnectionData conn = connection(map, qpost);

    double dq[kMaxAffineDim];
    for (std::size_t mu = 0; mu < dim; ++mu) dq[mu] = qpost[mu] - qpre[mu];

    SlicedActionTerms t;

    double gdqdq = 0.0;
    for (std::size_t mu = 0; mu < dim; ++mu)
        for (std::size_t nu = 0; nu < dim; ++nu)
            gdqdq += conn.metric.g[mu * dim + nu] * dq[mu] * dq[nu];
    t.kinetic = p.mass / (2.0 * erf_weight) * gdqdq;

    double tdq = 0.0, ts = 0.0;
    for (std::size_t nu = 0; nu < dim; ++nu) {
        tdq += conn.contraction_lower[nu] * dq[nu];
        ts += conn.contraction_lower[nu] * conn.contraction_raised[nu];
    }
    t.drift = -0.5 * p.hbar * tdq;
    t.contraction = erf_weight * p.hbar * p.hbar / (8.0 * p.mass) * ts;

    if (state.vector_potential) {
        const std::vector<double> a = state.vector_potential(qpost);
        if (a.size() != dim)
            throw std::invalid_argument("sliced_action_term: vector potential dimension mismatch");
        double adq = 0.0, as = 0.0;
        for (std::size_t mu = 0; mu < dim; ++mu) {
            adq += a[mu] * dq[mu];
            as += a[mu] * conn.contraction_raised[mu];
        }
        // Contravariant components for the divergence: raise with the local
        // metric at each sampled point.
        const VectorFieldSampler raised = [&](const std::vector<double>& qq) {
            const MetricData md = induced_metric(frame(map, qq));
            const std::vector<double> al = state.vector_potential(qq);
            std::vector<double> ar(dim, 0.0);
            for (std::size_t mu = 0; mu < dim; ++mu)
                for (std::size_t nu = 0; nu < dim; ++nu)
                    ar[mu] += md.g_inv[mu * dim + nu] * al[nu];
            return ar;
        };
        double qscale = 1.0;
        for (std::size_t mu = 0; mu < dim; ++mu)
            qscale = std::max(qscale, std::abs(qpost[mu]));
        const double div = covariant_divergence(raised, conn, qpost, 1e-5 * qscale);
        t.gauge = Complex(0.0, -1.0) * (state.charge / p.light_speed) *
                  (adq - erf_weight * p.hbar / (2.0 * p.mass) * (as + div));
    }

    double v = 0.0;
    if (state.scalar_potential) v = state.scalar_potential(qpost);
    const Complex ev = state.energy - v;
    t.energy = -erf_weight * ev * ev / (2.0 * mc2);
    t.mass = erf_weight * 0.5 * mc2;
    return t;
}

Complex sliced_action(const SlicedPathState& state, const CoordinateMap& map,
                      const ParticleConfig& p, const ScalarFieldSampler& f) {
    const std::size_t slices = state.slice_count();
    Complex total(0.0, 0.0);
    for (std::size_t n = 0; n < slices; ++n)
        total += sliced_action_term(state, n, map, p, f).total();
    return total;
}

}  // namespace relgreen
