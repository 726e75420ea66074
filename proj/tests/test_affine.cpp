#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relgreen/affine.hpp"
#include "relgreen/errors.hpp"
#include "relgreen/types.hpp"

#include <cmath>
#include <vector>

using namespace relgreen;

namespace {

// Independent 2x2 inverse for cross-checking the metric route.
void invert2(const MetricData& md, double out[4]) {
    const double a = md.g[0], b = md.g[1], c = md.g[2], d = md.g[3];
    const double det = a * d - b * c;
    out[0] = d / det;
    out[1] = -b / det;
    out[2] = -c / det;
    out[3] = a / det;
}

} // namespace

TEST_CASE("identity map has a trivial geometry") {
    const CoordinateMap map = CoordinateMap::identity(3);
    const std::vector<double> q{0.4, -1.2, 2.0};
    const Frame fr = frame(map, q);
    const MetricData md = induced_metric(fr);
    const ConnectionData conn = connection(map, q);
    CHECK(fr.det == 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t mu = 0; mu < 3; ++mu) {
            CHECK(fr(i, mu) == (i == mu ? 1.0 : 0.0));
            CHECK(md.metric(i, mu) == (i == mu ? 1.0 : 0.0));
            CHECK(md.inverse(i, mu) == (i == mu ? 1.0 : 0.0));
        }
    CHECK(md.sqrt_g == 1.0);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(conn.contraction_lower[l] == 0.0);
        CHECK(conn.contraction_raised[l] == 0.0);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t m = 0; m < 3; ++m) CHECK(conn(l, k, m) == 0.0);
    }
}

TEST_CASE("polar frame and metric take their closed forms") {
    const CoordinateMap map = CoordinateMap::polar2d();
    SUBCASE("exact values on the axis") {
        const std::vector<double> q{2.0, 0.0};
        const Frame fr = frame(map, q);
        CHECK(fr(0, 0) == 1.0);
        CHECK(fr(0, 1) == -0.0);
        CHECK(fr(1, 0) == 0.0);
        CHECK(fr(1, 1) == 2.0);
        CHECK(fr.det == 2.0);
        const MetricData md = induced_metric(fr);
        CHECK(md.metric(0, 0) == 1.0);
        CHECK(md.metric(0, 1) == 0.0);
        CHECK(md.metric(1, 0) == 0.0);
        CHECK(md.metric(1, 1) == 4.0);
        CHECK(md.inverse(1, 1) == 0.25);
        CHECK(md.sqrt_g == 2.0);
    }
    SUBCASE("generic angle within rounding") {
        const double r = 1.7, th = 0.6;
        const MetricData md = induced_metric(frame(map, {r, th}));
        CHECK(std::abs(md.metric(0, 0) - 1.0) <= 1e-15);
        CHECK(std::abs(md.metric(0, 1)) <= 1e-15 * r);
        CHECK(std::abs(md.metric(1, 1) - r * r) <= 1e-15 * r * r);
        CHECK(std::abs(md.sqrt_g - r) <= 1e-15 * r);
    }
}

TEST_CASE("polar connection carries exactly the two classic symbols") {
    const CoordinateMap map = CoordinateMap::polar2d();
    const double r = 1.3, th = 0.9;
    const ConnectionData conn = connection(map, {r, th});
    CHECK(std::abs(conn(1, 1, 0) + r) <= 1e-14 * r);          // Gamma_thth^r = -r
    CHECK(std::abs(conn(0, 1, 1) - 1.0 / r) <= 1e-14 / r);    // Gamma_rth^th = 1/r
    CHECK(std::abs(conn(1, 0, 1) - 1.0 / r) <= 1e-14 / r);
    CHECK(std::abs(conn(0, 0, 0)) <= 1e-15);
    CHECK(std::abs(conn(0, 1, 0)) <= 1e-15);
    CHECK(std::abs(conn(1, 1, 1)) <= 1e-15);
    // T_nu and its raised partner
    CHECK(std::abs(conn.contraction_lower[0] - 1.0 / r) <= 1e-14 / r);
    CHECK(std::abs(conn.contraction_lower[1]) <= 1e-15);
    CHECK(std::abs(conn.contraction_raised[0] - 1.0 / r) <= 1e-14 / r);
    CHECK(std::abs(conn.contraction_raised[1]) <= 1e-15);
}

TEST_CASE("finite-difference derivatives recover the analytic frame") {
    // Same polar map, but supplied as a bare closure: the jacobian and the
    // hessian must come out of central differences with Richardson.
    const CoordinateMap::MapFn h = [](const double* q, double* x) {
        x[0] = q[0] * std::cos(q[1]);
        x[1] = q[0] * std::sin(q[1]);
    };
    const CoordinateMap fd_map = CoordinateMap::from_closures(
        2, h, {1e-6, -1e9}, {1e9, 1e9});
    const CoordinateMap exact = CoordinateMap::polar2d();
    const std::vector<double> q{1.4, -0.8};
    const Frame fa = frame(exact, q);
    const Frame fb = frame(fd_map, q);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t mu = 0; mu < 2; ++mu)
            CHECK(std::abs(fb(i, mu) - fa(i, mu)) <= 1e-9);
    const ConnectionData ca = connection(exact, q);
    const ConnectionData cb = connection(fd_map, q);
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t m = 0; m < 2; ++m)
                CHECK(std::abs(cb(l, k, m) - ca(l, k, m)) <= 1e-5);
}

TEST_CASE("contractions are consistent with the raw symbols and the metric") {
    // Curvilinear map without analytic derivatives: the identities
    // T_nu = Gamma_{mu nu}^mu and S = g^{-1} T must hold regardless of how
    // accurate the finite differences are.
    const CoordinateMap::MapFn h = [](const double* q, double* x) {
        x[0] = q[0] + 0.3 * std::sin(q[1]);
        x[1] = q[1] + 0.2 * q[0] * q[0];
    };
    const CoordinateMap map =
        CoordinateMap::from_closures(2, h, {-2.0, -2.0}, {2.0, 2.0});
    const std::vector<double> q{0.7, -0.4};
    const ConnectionData conn = connection(map, q);
    for (std::size_t nu = 0; nu < 2; ++nu) {
        double t_nu = 0.0;
        for (std::size_t mu = 0; mu < 2; ++mu) t_nu += conn(mu, nu, mu);
        CHECK(std::abs(t_nu - conn.contraction_lower[nu]) <=
              1e-12 * (1.0 + std::abs(t_nu)));
    }
    double ginv[4];
    invert2(conn.metric, ginv);
    for (std::size_t nu = 0; nu < 2; ++nu) {
        const double s_nu = ginv[nu * 2 + 0] * conn.contraction_lower[0] +
                            ginv[nu * 2 + 1] * conn.contraction_lower[1];
        CHECK(std::abs(s_nu - conn.contraction_raised[nu]) <=
              1e-12 * (1.0 + std::abs(s_nu)));
    }
    // Hessian symmetry propagates into the lower index pair.
    for (std::size_t m = 0; m < 2; ++m)
        CHECK(conn(0, 1, m) == conn(1, 0, m));
    // And g g^-1 stays the identity.
    const MetricData& md = conn.metric;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 2; ++k)
                acc += md.metric(i, k) * md.inverse(k, j);
            CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
}

TEST_CASE("covariant divergence reproduces the polar textbook values") {
    const CoordinateMap map = CoordinateMap::polar2d();
    const std::vector<double> q{1.3, 0.7};
    const ConnectionData conn = connection(map, q);
    // Position field r d_r: components (r, 0); flat divergence is 2.
    const VectorFieldSampler radial = [](const std::vector<double>& x) {
        return std::vector<double>{x[0], 0.0};
    };
    CHECK(std::abs(covariant_divergence(radial, conn, q, 1e-4) - 2.0) <= 1e-10);
    // Rigid rotation d_theta: components (0, w); divergence-free.
    const VectorFieldSampler rot = [](const std::vector<double>&) {
        return std::vector<double>{0.0, 1.7};
    };
    CHECK(std::abs(covariant_divergence(rot, conn, q, 1e-4)) <= 1e-14);
}

TEST_CASE("covariant divergence is linear in the field") {
    const CoordinateMap map = CoordinateMap::polar2d();
    const std::vector<double> q{0.9, -1.1};
    const ConnectionData conn = connection(map, q);
    const VectorFieldSampler fx = [](const std::vector<double>& x) {
        return std::vector<double>{std::sin(x[1]), x[0] * x[0]};
    };
    const VectorFieldSampler fy = [](const std::vector<double>& x) {
        return std::vector<double>{x[0] * x[1], std::cos(x[0])};
    };
    const double a = 0.6, b = -1.4;
    const VectorFieldSampler mix = [&](const std::vector<double>& x) {
        const std::vector<double> u = fx(x), v = fy(x);
        return std::vector<double>{a * u[0] + b * v[0], a * u[1] + b * v[1]};
    };
    const double lhs = covariant_divergence(mix, conn, q, 1e-5);
    const double rhs = a * covariant_divergence(fx, conn, q, 1e-5) +
                       b * covariant_divergence(fy, conn, q, 1e-5);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
}

TEST_CASE("divergence rejects malformed input") {
    const CoordinateMap map = CoordinateMap::polar2d();
    const std::vector<double> q{1.0, 0.0};
    const ConnectionData conn = connection(map, q);
    const VectorFieldSampler ok = [](const std::vector<double>&) {
        return std::vector<double>{1.0, 0.0};
    };
    CHECK_THROWS_AS(covariant_divergence(nullptr, conn, q, 1e-4),
                    std::invalid_argument);
    CHECK_THROWS_AS(covariant_divergence(ok, conn, q, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(covariant_divergence(ok, conn, {1.0, 0.0, 0.0}, 1e-4),
                    std::invalid_argument);
}

TEST_CASE("post-point kinetic quadratic is cubically close to the chord") {
    // |h(q_post) - h(q_pre)|^2 = g_{mu nu}(q_post) dq^mu dq^nu + O(|dq|^3):
    // halving dq must shrink the remainder by about eight.
    const CoordinateMap map = CoordinateMap::polar2d();
    const std::vector<double> qpost{1.3, 0.7};
    const double dir[2] = {0.4, -0.3};
    const MetricData md = induced_metric(frame(map, qpost));
    const auto remainder = [&](double s) {
        const std::vector<double> qpre{qpost[0] - s * dir[0],
                                       qpost[1] - s * dir[1]};
        const std::vector<double> xb = map.evaluate(qpost);
        const std::vector<double> xa = map.evaluate(qpre);
        const double chord2 = (xb[0] - xa[0]) * (xb[0] - xa[0]) +
                              (xb[1] - xa[1]) * (xb[1] - xa[1]);
        double quad = 0.0;
        for (std::size_t mu = 0; mu < 2; ++mu)
            for (std::size_t nu = 0; nu < 2; ++nu)
                quad += md.metric(mu, nu) * s * dir[mu] * s * dir[nu];
        return std::abs(chord2 - quad);
    };
    const double r1 = remainder(0.02), r2 = remainder(0.01);
    CHECK(r2 > 0.0);
    CHECK(r1 / r2 > 6.5);
    CHECK(r1 / r2 < 10.0);
}

TEST_CASE("flat patch reduces to the elementary sliced action") {
    ParticleConfig p;
    const CoordinateMap map = CoordinateMap::identity(2);
    SlicedPathState st;
    st.q = {{0.1, 0.2}, {0.35, 0.15}, {0.3, 0.4}};
    st.rho = {1.0, 1.2, 0.9};
    st.eps_s = 0.05;
    st.energy = Complex(0.4, 0.1);
    st.charge = 1.3;
    st.vector_potential = [](const std::vector<double>& x) {
        return std::vector<double>{0.3 + 0.2 * x[0] - 0.1 * x[1],
                                   -0.4 + 0.5 * x[1]};
    };
    st.scalar_potential = [](const std::vector<double>& x) {
        return 0.3 * x[0];
    };

    for (std::size_t n = 0; n < st.slice_count(); ++n) {
        const SlicedActionTerms lib = sliced_action_term(st, n, map, p);

        const std::vector<double>& qpre = st.q[n];
        const std::vector<double>& qpost = st.q[n + 1];
        const double rho = st.rho[n + 1];
        const double w = st.eps_s * rho;
        const double dq0 = qpost[0] - qpre[0], dq1 = qpost[1] - qpre[1];

        const Complex kin = p.mass / (2.0 * w) * (dq0 * dq0 + dq1 * dq1);
        // Flat space: no drift, no contraction.  Gauge: A.dq minus the
        // ordering term, whose divergence is a plain central difference at
        // the step the evaluator pins (1e-5 of the coordinate scale).
        const std::vector<double> a = st.vector_potential(qpost);
        const double adq = a[0] * dq0 + a[1] * dq1;
        const double step =
            1e-5 * std::max({1.0, std::abs(qpost[0]), std::abs(qpost[1])});
        double div = 0.0;
        for (std::size_t mu = 0; mu < 2; ++mu) {
            std::vector<double> qp = qpost, qm = qpost;
            qp[mu] += step;
            qm[mu] -= step;
            div += (st.vector_potential(qp)[mu] - st.vector_potential(qm)[mu]) /
                   (2.0 * step);
        }
        const Complex gauge = Complex(0.0, -1.0) * (st.charge / p.light_speed) *
                              (adq - w * p.hbar / (2.0 * p.mass) * div);
        const Complex ev = st.energy - 0.3 * qpost[0];
        const Complex energy = -w * ev * ev / 2.0;
        const Complex mass = w * 0.5;

        CHECK(std::abs(lib.kinetic - kin) <= 1e-14 * std::abs(kin));
        CHECK(std::abs(lib.drift) == 0.0);
        CHECK(std::abs(lib.contraction) == 0.0);
        CHECK(std::abs(lib.gauge - gauge) <= 1e-14 * std::abs(gauge));
        CHECK(std::abs(lib.energy - energy) <= 1e-14 * std::abs(energy));
        CHECK(std::abs(lib.mass - mass) <= 1e-14 * std::abs(mass));
        CHECK(std::abs(lib.total() - (kin + gauge + energy + mass)) <=
              1e-13 * std::abs(lib.total()));
    }
}

TEST_CASE("polar slice term matches an independent transcription") {
    ParticleConfig p;
    p.mass = 1.2;
    p.light_speed = 1.5;
    const CoordinateMap map = CoordinateMap::polar2d();
    SlicedPathState st;
    st.q = {{1.1, 0.4}, {1.25, 0.55}, {1.2, 0.7}};
    st.rho = {1.0, 1.3, 0.8};
    st.eps_s = 0.04;
    st.energy = Complex(0.9, 0.0);
    st.charge = 0.7;
    st.vector_potential = [](const std::vector<double>& x) {
        return std::vector<double>{0.2 * x[1], -0.3 * x[0]};
    };
    st.scalar_potential = [](const std::vector<double>& x) {
        return 0.1 * x[0] * x[0];
    };
    const ScalarFieldSampler prof = [](const std::vector<double>& x) {
        return 1.0 + 0.2 * x[0];
    };

    for (std::size_t n = 0; n < st.slice_count(); ++n) {
        const SlicedActionTerms lib = sliced_action_term(st, n, map, p, prof);

        const std::vector<double>& qpre = st.q[n];
        const std::vector<double>& qpost = st.q[n + 1];
        const double rho = st.rho[n + 1];
        const double fval = prof(qpost);
        const double w = st.eps_s * rho * fval;
        const double mc2 = p.rest_energy();
        const ConnectionData conn = connection(map, qpost);
        const double dq[2] = {qpost[0] - qpre[0], qpost[1] - qpre[1]};

        double gdqdq = 0.0, tdq = 0.0, ts = 0.0;
        for (std::size_t mu = 0; mu < 2; ++mu) {
            tdq += conn.contraction_lower[mu] * dq[mu];
            ts += conn.contraction_lower[mu] * conn.contraction_raised[mu];
            for (std::size_t nu = 0; nu < 2; ++nu)
                gdqdq += conn.metric.metric(mu, nu) * dq[mu] * dq[nu];
        }
        const Complex kin = p.mass / (2.0 * w) * gdqdq;
        const Complex drift = -0.5 * p.hbar * tdq;
        const Complex contr = w * p.hbar * p.hbar / (8.0 * p.mass) * ts;

        const std::vector<double> a = st.vector_potential(qpost);
        const double adq = a[0] * dq[0] + a[1] * dq[1];
        const double as = a[0] * conn.contraction_raised[0] +
                          a[1] * conn.contraction_raised[1];
        const VectorFieldSampler raised = [&](const std::vector<double>& xq) {
            const MetricData md = induced_metric(frame(map, xq));
            const std::vector<double> al = st.vector_potential(xq);
            std::vector<double> ar(2, 0.0);
            for (std::size_t mu = 0; mu < 2; ++mu)
                for (std::size_t nu = 0; nu < 2; ++nu)
                    ar[mu] += md.inverse(mu, nu) * al[nu];
            return ar;
        };
        const double step =
            1e-5 * std::max({1.0, std::abs(qpost[0]), std::abs(qpost[1])});
        const double div = covariant_divergence(raised, conn, qpost, step);
        const Complex gauge = Complex(0.0, -1.0) * (st.charge / p.light_speed) *
                              (adq - w * p.hbar / (2.0 * p.mass) * (as + div));
        const Complex ev = st.energy - st.scalar_potential(qpost);
        const Complex energy = -w * ev * ev / (2.0 * mc2);
        const Complex mass = w * 0.5 * mc2;

        CHECK(std::abs(lib.kinetic - kin) <= 1e-12 * std::abs(kin));
        CHECK(std::abs(lib.drift - drift) <= 1e-12 * std::abs(drift));
        CHECK(std::abs(lib.contraction - contr) <= 1e-12 * std::abs(contr));
        CHECK(std::abs(lib.gauge - gauge) <= 1e-12 * std::abs(gauge));
        CHECK(std::abs(lib.energy - energy) <= 1e-12 * std::abs(energy));
        CHECK(std::abs(lib.mass - mass) <= 1e-12 * std::abs(mass));
    }
}

TEST_CASE("degenerate jacobians are refused") {
    const CoordinateMap::MapFn collapse = [](const double* q, double* x) {
        x[0] = q[0] + q[1];
        x[1] = 2.0 * (q[0] + q[1]);
    };
    const CoordinateMap map =
        CoordinateMap::from_closures(2, collapse, {-5.0, -5.0}, {5.0, 5.0});
    CHECK_THROWS_AS(frame(map, {0.3, 0.4}), SingularJacobianError);
    CHECK_THROWS_AS(connection(map, {0.3, 0.4}), SingularJacobianError);
}

TEST_CASE("domain violations surface as domain errors") {
    const CoordinateMap polar = CoordinateMap::polar2d();
    CHECK_THROWS_AS(frame(polar, {0.0, 0.3}), std::domain_error);
    CHECK_THROWS_AS(frame(polar, {-1.0, 0.3}), std::domain_error);
    // Sitting on a closed boundary leaves no room for differencing.
    const CoordinateMap::MapFn h = [](const double* q, double* x) {
        x[0] = q[0];
    };
    const CoordinateMap edge =
        CoordinateMap::from_closures(1, h, {0.0}, {1.0});
    CHECK_THROWS_AS(frame(edge, {0.0}), std::domain_error);
}

TEST_CASE("sliced path state validation") {
    ParticleConfig p;
    const CoordinateMap map = CoordinateMap::identity(2);
    SlicedPathState st;
    st.q = {{0.0, 0.0}, {0.1, 0.1}};
    st.rho = {1.0, 1.0};
    st.eps_s = 0.1;
    CHECK_NOTHROW(sliced_action_term(st, 0, map, p));
    CHECK_THROWS_AS(sliced_action_term(st, 1, map, p), std::out_of_range);

    SlicedPathState bad = st;
    bad.rho = {1.0};
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
    bad = st;
    bad.rho = {1.0, -0.2};
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
    bad = st;
    bad.eps_s = 0.0;
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
    bad = st;
    bad.q = {{0.0}, {0.1}};
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
    bad = st;
    bad.q = {{0.0, 0.0}};
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);

    // A non-positive transformation profile is a hard error.
    const ScalarFieldSampler zero_prof = [](const std::vector<double>&) {
        return 0.0;
    };
    CHECK_THROWS_AS(sliced_action_term(st, 0, map, p, zero_prof),
                    std::domain_error);
}

TEST_CASE("map evaluation round trip") {
    const CoordinateMap polar = CoordinateMap::polar2d();
    const std::vector<double> x = polar.evaluate({1.0, M_PI / 2.0});
    CHECK(std::abs(x[0]) <= 1e-16);
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
}
