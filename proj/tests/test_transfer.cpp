#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relgreen/errors.hpp"
#include "relgreen/free_green.hpp"
#include "relgreen/parallel.hpp"
#include "relgreen/potential.hpp"
#include "relgreen/resolvent.hpp"
#include "relgreen/transfer.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace relgreen;

namespace {

// Smooth attractive bump sampled onto a tabulated potential; smoothness keeps
// the slice-composition error at its design order.
Potential smooth_bump() {
    std::vector<double> xs, vs;
    for (int i = 0; i <= 400; ++i) {
        const double x = -6.0 + 12.0 * i / 400.0;
        xs.push_back(x);
        vs.push_back(-0.4 * std::exp(-x * x));
    }
    return Potential::tabulated(xs, vs);
}

} // namespace

TEST_CASE("free amplitude emerges from brute-force slicing") {
    ParticleConfig p;
    const Potential V = Potential::zero();
    const Complex E(0.25, 0.0);
    const Complex ref = free_amplitude_1d(0.7, -0.4, E, p);
    const Complex got = transfer_matrix_amplitude(V, E, 0.7, -0.4, p);
    CHECK(std::abs(got - ref) <= 1e-3 * std::abs(ref));
}

TEST_CASE("random free comparisons stay inside the coarse budget") {
    ParticleConfig p;
    const Potential V = Potential::zero();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ue(-0.6, 0.6), ux(-1.2, 1.2);
    for (int i = 0; i < 10; ++i) {
        const Complex E(ue(rng), 0.0);
        const double xb = ux(rng), xa = ux(rng);
        const Complex ref = free_amplitude_1d(xb, xa, E, p);
        const Complex got = transfer_matrix_amplitude(V, E, xb, xa, p);
        CAPTURE(E.real());
        CAPTURE(xb);
        CAPTURE(xa);
        CHECK(std::abs(got - ref) <= 1e-3 * std::abs(ref));
    }
}

TEST_CASE("joint refinement converges at second order") {
    ParticleConfig p;
    const Potential V = Potential::zero();
    const Complex E(0.25, 0.0);
    const Complex ref = free_amplitude_1d(0.7, -0.4, E, p);
    GridSpec g;
    SlicingSpec s;
    const Complex e0 =
        transfer_matrix_amplitude(V, E, 0.7, -0.4, p, g, s) - ref;
    g.dx *= 0.5;
    s.eps *= 0.5;
    const Complex e1 =
        transfer_matrix_amplitude(V, E, 0.7, -0.4, p, g, s) - ref;
    CHECK(std::abs(e1) < std::abs(e0));
    const double ratio = std::abs(e0) / std::abs(e1);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("square well agrees with the resolvent route") {
    ParticleConfig p;
    const Potential V = Potential::square_well(-0.3, -0.8, 0.9);
    const Complex E(0.25, 0.0);
    const Complex ref = resolvent_1d(V, E, 0.7, -0.4, p, 1e-10);
    const Complex got = transfer_matrix_amplitude(V, E, 0.7, -0.4, p);
    CHECK(std::abs(got - ref) <= 1e-3 * std::abs(ref));
}

TEST_CASE("random sub-threshold points match the resolvent to the budget") {
    ParticleConfig p;
    const Potential V = smooth_bump();
    std::mt19937 rng(59);
    // Keep |E - V| well below the rest energy: the effective barrier must
    // stay positive on the whole grid for the scale integral to converge.
    std::uniform_real_distribution<double> ue(-0.5, 0.5), ux(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const Complex E(ue(rng), 0.0);
        const double xb = ux(rng), xa = ux(rng);
        const Complex ref = resolvent_1d(V, E, xb, xa, p, 1e-10);
        const Complex got = transfer_matrix_amplitude(V, E, xb, xa, p);
        CAPTURE(E.real());
        CAPTURE(xb);
        CAPTURE(xa);
        CHECK(std::abs(got - ref) <= 1e-3 * std::abs(ref));
    }
}

TEST_CASE("endpoint exchange is bitwise even with a potential") {
    ParticleConfig p;
    const Potential V = Potential::square_well(-0.3, -0.8, 0.9);
    const Complex E(0.2, 0.0);
    const Complex a = transfer_matrix_amplitude(V, E, 0.7, -0.4, p);
    const Complex b = transfer_matrix_amplitude(V, E, -0.4, 0.7, p);
    CHECK(a.real() == b.real());
    CHECK(a.imag() == b.imag());
}

TEST_CASE("serial and parallel composition agree bitwise") {
    ParticleConfig p;
    const Potential V = Potential::square_well(-0.3, -0.8, 0.9);
    const Complex E(0.25, 0.0);
    const Complex s =
        transfer_matrix_amplitude(V, E, 0.7, -0.4, p, {}, {}, Exec::serial);
    const Complex q =
        transfer_matrix_amplitude(V, E, 0.7, -0.4, p, {}, {}, Exec::parallel);
    CHECK(s.real() == q.real());
    CHECK(s.imag() == q.imag());
}

TEST_CASE("fixed-scale composition is consistent under slice doubling") {
    // <x_b|T^n|x_a> at fixed L: the symmetric slice splitting converges at
    // second order in the slice width, so the error ratio under doubling
    // sits near four.  A smooth potential keeps the order intact.
    ParticleConfig p;
    const Potential V = smooth_bump();
    const Complex E(0.1, 0.0);
    GridSpec g;
    g.dx = 0.005;
    g.margin = 8.0;
    const double L = 1.5;
    const Complex k1 = transfer_fixed_scale(V, E, 0.4, -0.2, p, g, L, 12);
    const Complex k2 = transfer_fixed_scale(V, E, 0.4, -0.2, p, g, L, 24);
    const Complex k3 = transfer_fixed_scale(V, E, 0.4, -0.2, p, g, L, 48);
    const double r = std::abs(k1 - k2) / std::abs(k2 - k3);
    CHECK(r > 3.0);
    CHECK(r < 4.6);
}

TEST_CASE("report carries the resolved controls") {
    ParticleConfig p;
    const TransferReport rep = transfer_matrix_report(
        Potential::zero(), Complex(0.25, 0.0), 0.7, -0.4, p);
    CHECK(rep.grid_points > 0);
    CHECK(rep.lattice_slices > 0);
    CHECK(rep.quad_nodes > 0);
    CHECK(rep.dx_used > 0.0);
    CHECK(rep.tail_estimate <= 1e-7);
    CHECK(rep.l_split_used > 0.0);
    CHECK(rep.l_max_used > rep.l_split_used);
    // The decay rate at E=0.25 is kappa ~ 0.968; the auto margin spans
    // eight decay lengths.
    const double kappa = std::sqrt(1.0 - 0.25 * 0.25);
    CHECK(rep.margin_used == doctest::Approx(8.0 / kappa).epsilon(1e-12));
}

TEST_CASE("continuum energies and thin margins are refused") {
    ParticleConfig p;
    const Potential V = Potential::zero();
    CHECK_THROWS_AS(
        transfer_matrix_amplitude(V, Complex(1.2, 0.0), 0.5, -0.5, p),
        TruncationBoundError);
    GridSpec thin;
    thin.margin = 2.0; // below five decay lengths at this energy
    CHECK_THROWS_AS(
        transfer_matrix_amplitude(V, Complex(0.0, 0.0), 0.5, -0.5, p, thin),
        TruncationBoundError);
    SlicingSpec starved;
    starved.l_max = 3.0; // truncates the L-integral before the tail bound
    starved.tail_tol = 1e-12;
    CHECK_THROWS_AS(transfer_matrix_amplitude(V, Complex(0.0, 0.0), 0.5, -0.5,
                                              p, {}, starved),
                    TruncationBoundError);
}
