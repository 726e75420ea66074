#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relgreen/quadrature.hpp"

#include <cmath>

using namespace relgreen;

namespace {

double integrate(const QuadratureNodes& q, double (*f)(double)) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(q.x[i]);
    return s;
}

}  // namespace

TEST_CASE("nodes stay strictly inside the interval and weights are positive") {
    const auto q = tanh_sinh_nodes(3.0, 6);
    REQUIRE(q.x.size() == q.w.size());
    REQUIRE(q.x.size() > 10);
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        CHECK(q.x[i] > 0.0);
        CHECK(q.x[i] < 3.0);
        CHECK(q.w[i] > 0.0);
        if (i) CHECK(q.x[i] > q.x[i - 1]);
    }
}

TEST_CASE("smooth integrands are integrated to near machine precision") {
    const auto q = tanh_sinh_nodes(2.0, 7);
    CHECK(integrate(q, +[](double) { return 1.0; }) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(integrate(q, +[](double x) { return std::exp(-x); }) ==
          doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-13));
    CHECK(integrate(q, +[](double x) { return x * x; }) ==
          doctest::Approx(8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("integrable endpoint singularities are handled") {
    const auto q = tanh_sinh_nodes(1.0, 8);
    // 1/sqrt(x) integrates to 2; the open rule never evaluates at x = 0.
    CHECK(integrate(q, +[](double x) { return 1.0 / std::sqrt(x); }) ==
          doctest::Approx(2.0).epsilon(1e-10));
    // log singularity
    CHECK(integrate(q, +[](double x) { return std::log(x); }) ==
          doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("raising the level refines the estimate") {
    const auto f = +[](double x) { return std::sqrt(x) * std::exp(-x); };
    const double exact = 0.37894469164098463;  // Int_0^1 sqrt(x) e^-x dx
    double prev = 1.0;
    for (int level = 3; level <= 7; ++level) {
        const double err = std::abs(integrate(tanh_sinh_nodes(1.0, level), f) - exact);
        CHECK(err < prev + 1e-15);
        prev = err;
    }
    CHECK(prev < 1e-12);
}
