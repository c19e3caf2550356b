#include <cmath>
#include <random>

#include "csm/errors.hpp"
#include "csm/specfun.hpp"
#include "doctest.h"
#include "specfun_goldens.hpp"

using namespace csm;

namespace {
double rel(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }
}  // namespace

TEST_CASE("gamma: classical values") {
    CHECK(std::abs(complex_gamma(1.0) - 1.0) < 1e-15);
    CHECK(rel(complex_gamma(0.5), std::sqrt(kPi)) < 1e-14);
    CHECK(rel(complex_gamma(6.0), 120.0) < 1e-13);
}

TEST_CASE("gamma: arbitrary-precision goldens") {
    for (const auto& [z, want] : goldens::gamma_points) {
        INFO("z = " << z);
        CHECK(rel(complex_gamma(z), want) < 1e-12);
    }
}

TEST_CASE("gamma: poles throw with the integer") {
    CHECK_THROWS_AS(complex_gamma(0.0), PoleError);
    try {
        complex_gamma(-3.0);
        FAIL("expected PoleError");
    } catch (const PoleError& e) {
        CHECK(e.pole() == -3);
    }
    CHECK(rgamma(-4.0) == cplx(0.0));
}

TEST_CASE("gamma: recurrence and reflection on random sample") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-21.0, 21.0);
    int checked = 0;
    while (checked < 1000) {
        const cplx z(coord(rng), coord(rng));
        if (std::abs(z) > 30.0) continue;
        const double dist = std::abs(z - std::round(z.real()));
        if (z.real() < 0.5 && dist < 0.1) continue;
        ++checked;
        const cplx g = complex_gamma(z);
        CHECK(rel(complex_gamma(z + 1.0), z * g) < 1e-12);
        const cplx refl = g * complex_gamma(1.0 - z) * std::sin(kPi * z) / kPi;
        CHECK(std::abs(refl - 1.0) < 1e-11);
    }
}

TEST_CASE("hyp2f1: trivial values") {
    CHECK(hyp2f1({0.3, 1.2, 2.5, 0.0}) == cplx(1.0));
    const cplx b(0.7, -0.4), c(1.3, 0.2), u(0.37, 0.21);
    CHECK(std::abs(hyp2f1({-1.0, b, c, u}) - (1.0 - b / c * u)) < 1e-15);
    // kappa = s makes a = 0: the function is the constant 1.
    const cplx s(-0.5, 1.3);
    CHECK(std::abs(hyp2f1({s - s, 2.0 * s + 1.0, s + 1.0, 0.5}) - 1.0) < 1e-15);
}

TEST_CASE("hyp2f1: arbitrary-precision goldens on the contract domain") {
    for (const auto& h : goldens::hyp2f1_points) {
        INFO("a=" << h.a << " b=" << h.b << " c=" << h.c << " u=" << h.u);
        CHECK(rel(hyp2f1({h.a, h.b, h.c, h.u}), h.value) < 1e-10);
    }
}

TEST_CASE("hyp2f1: Euler transformation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const cplx s = 0.5 * (-1.0 + std::sqrt(cplx(1.0 - 8.0 * (0.05 + 3.0 * uni(rng)))));
        const cplx k = (0.2 + 2.0 * uni(rng)) * std::exp(cplx(0.0, -0.75 * uni(rng)));
        const cplx kap = -cplx(0.0, 1.0) * k;
        const cplx a = kap - s, b = kap + s + 1.0, c = kap + 1.0;
        const cplx u = std::polar(0.95 * uni(rng), 2.0 * kPi * uni(rng));
        const cplx lhs = hyp2f1({a, b, c, u});
        const cplx rhs = std::pow(1.0 - u, c - a - b) * hyp2f1({c - a, c - b, c, u});
        CHECK(rel(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("hyp2f1: continuity across algorithm switches") {
    const cplx a(0.3, -0.8), b(1.1, 0.4), c(1.6, -0.3);
    // |u| = 0.5 (series / connection or Pfaff switch) and |1-u| = 0.5.
    for (double phase : {0.3, 1.0, 2.0, 2.8}) {
        for (cplx center : {std::polar(0.5, phase), 1.0 - std::polar(0.5, phase)}) {
            const cplx dir = center / std::abs(center);
            const cplx lo = hyp2f1({a, b, c, center - 0.5e-8 * dir});
            const cplx hi = hyp2f1({a, b, c, center + 0.5e-8 * dir});
            CHECK(rel(lo, hi) < 1e-7);
        }
    }
}

TEST_CASE("hyp2f1: integer c-a-b handled by perturbation") {
    // F(1, 1; 2; u) = -log(1-u)/u; c - a - b = 0.
    const cplx u(0.8, 0.1);
    CHECK(rel(hyp2f1({1.0, 1.0, 2.0, u}), -std::log(1.0 - u) / u) < 1e-9);
    // F(1/2, 1/2; 2; u) has c - a - b = 1.
    const cplx v(0.9, -0.05);
    const cplx series_ref = [&] {
        cplx term = 1.0, sum = 1.0;
        for (int j = 0; j < 20000; ++j) {
            term *= (0.5 + j) * (0.5 + j) / ((2.0 + j) * (j + 1.0)) * v;
            sum += term;
        }
        return sum;
    }();
    CHECK(rel(hyp2f1({0.5, 0.5, 2.0, v}), series_ref) < 1e-9);
}

TEST_CASE("hyp2f1: pole in c throws") {
    CHECK_THROWS_AS(hyp2f1({0.5, 0.25, -2.0, 0.3}), PoleError);
}

TEST_CASE("expint: closed forms") {
    // E_2(z) = e^{-z} - z E_1(z); E_p(0) = 1/(p-1).
    CHECK(std::abs(expint_e(3, 0.0) - 0.5) < 1e-15);
    for (cplx z : {cplx(0.0, 0.7), cplx(0.2, 3.0), cplx(1.0, -10.0), cplx(0.0, 40.0)}) {
        const cplx e1 = expint_e(1, z);
        CHECK(rel(expint_e(2, z), std::exp(-z) - z * e1) < 1e-12);
    }
    // E_1(i) = -Ci(1) + i (Si(1) - pi/2)
    const cplx want(-0.33740392290096813, 0.946083070367183 - kPi / 2.0);
    CHECK(rel(expint_e(1, cplx(0.0, 1.0)), want) < 1e-13);
}
