#include <cmath>
#include <random>

#include "csm/errors.hpp"
#include "csm/model.hpp"
#include "doctest.h"

using namespace csm;

namespace {
const cplx I(0.0, 1.0);

// Root of theta_n(lambda) = theta by bisection on real lambda: independent of the
// closed-form bounds.
double contact_root(ModelParams p, int n, double lo, double hi) {
    auto f = [&](double lam) { return critical_angle(with_lambda(p, lam), n).quadrant_corrected - p.theta; };
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("resonance_energy: default units, lambda = 1") {
    ModelParams p;
    const auto r0 = resonance_energy(p, 0);
    CHECK(std::abs(r0.energy - cplx(0.75, -std::sqrt(7.0) / 4.0)) < 1e-14);
    CHECK(r0.width == doctest::Approx(std::sqrt(7.0) / 2.0).epsilon(1e-14));
    CHECK(std::abs(r0.k - cplx(std::sqrt(7.0) / 2.0, -0.5)) < 1e-14);

    const auto r1 = resonance_energy(p, 1);
    CHECK(std::abs(r1.energy - cplx(-0.25, -3.0 * std::sqrt(7.0) / 4.0)) < 1e-14);
}

TEST_CASE("resonance_energy: limiting and degenerate couplings") {
    ModelParams p;
    p.lambda = 0.125 * (1.0 + 1e-10);
    const auto r = resonance_energy(p, 0);
    CHECK(std::abs(r.energy - cplx(-0.125, 0.0)) < 1e-5);
    p.lambda = 0.125;
    CHECK_THROWS_AS(resonance_energy(p, 0), DegenerateIndex);
    CHECK_THROWS_AS(resonance_energy(ModelParams{}, -1), DomainError);
}

TEST_CASE("resonance_energy: pole invariants") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        ModelParams p;
        p.m = 0.5 + 2.0 * uni(rng);
        p.hbar = 0.5 + uni(rng);
        p.beta = 0.5 + 2.0 * uni(rng);
        p.lambda = p.energy_unit() * (1.05 + 20.0 * uni(rng));
        const auto d = derive(p);
        CHECK(std::abs(d.s * (d.s + 1.0) + d.g / 4.0) < 1e-12 * std::abs(d.g));
        CHECK(d.s.imag() > 0.0);  // principal root: +i sqrt(g-1)
        for (int n = 0; n < 3; ++n) {
            const auto r = resonance_energy(p, n);
            CHECK(r.energy.imag() < 0.0);
            CHECK(r.k.real() > 0.0);
            CHECK(r.k.imag() < 0.0);
            CHECK(std::abs(r.kappa + d.s + 1.0 + double(n)) < 1e-12 * (1.0 + std::abs(r.kappa)));
            CHECK(std::abs(p.hbar * p.hbar * r.k * r.k / (2.0 * p.m) - r.energy) < 1e-12 * std::abs(r.energy));
        }
    }
}

TEST_CASE("resonance_energy: theta does not enter") {
    ModelParams p;
    p.lambda = cplx(0.7, 0.05);
    const auto ref = resonance_energy(p, 0).energy;
    for (double th = 0.01; th < kPi / 4; th += 0.05) {
        const auto e = resonance_energy(with_theta(p, th), 0).energy;
        CHECK(e.real() == ref.real());
        CHECK(e.imag() == ref.imag());
    }
}

TEST_CASE("critical_angle") {
    ModelParams p;
    const auto a = critical_angle(p, 0);
    CHECK(a.raw == doctest::Approx(0.5 * std::atan(std::sqrt(7.0) / 3.0)).epsilon(1e-14));
    CHECK(a.raw == doctest::Approx(0.361367).epsilon(1e-6));
    CHECK_FALSE(a.undefined);

    // lambda = 1, n = 1 has Re E < 0: the raw arctan and the quadrant-corrected angle differ.
    const auto b = critical_angle(p, 1);
    CHECK(b.raw < 0.0);
    CHECK(b.quadrant_corrected > kPi / 4.0);
    CHECK(b.quadrant_corrected == doctest::Approx(b.raw + kPi / 2.0).epsilon(1e-14));

    // g = 10: sqrt(g-1) = 3 and the n = 1 bracket is 3 - 3i, Re E = 0.
    p.lambda = 10.0 * p.energy_unit();
    const auto c = critical_angle(p, 1);
    CHECK(c.undefined);
    CHECK(c.raw == doctest::Approx(kPi / 4.0));

    // theta_0 -> 0 as lambda -> infinity
    p.lambda = 1e8;
    CHECK(critical_angle(p, 0).raw < 1e-4);
}

TEST_CASE("critical_angle: monotone in n inside the admissible window") {
    ModelParams p;
    for (double th : {0.1, 0.2, 0.3}) {
        p.theta = th;
        const auto rb = lambda_window(p);
        for (int i = 1; i < 20; ++i) {
            const double lam = rb.lambda0_plus + (rb.lambda1_plus - rb.lambda0_plus) * i / 20.0;
            const auto t0 = critical_angle(with_lambda(p, lam), 0).quadrant_corrected;
            const auto t1 = critical_angle(with_lambda(p, lam), 1).quadrant_corrected;
            const auto t2 = critical_angle(with_lambda(p, lam), 2).quadrant_corrected;
            CHECK(t0 < th);
            CHECK(th < t1);
            CHECK(t1 < t2);
        }
    }
}

TEST_CASE("lambda_window: theta = pi/6 closed forms") {
    ModelParams p;
    p.theta = kPi / 6.0;
    const auto rb = lambda_window(p);
    CHECK(rb.lambda0_plus == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(rb.lambda_bp - rb.lambda0_plus) < 1e-14);
    CHECK(std::abs(rb.energy_bp - cplx(0.25, -std::sqrt(3.0) / 4.0)) < 1e-14);
    CHECK(std::abs(rb.k_bp - std::exp(-I * kPi / 6.0)) < 1e-14);
    CHECK(std::abs(std::tan(2.0 * p.theta) * rb.energy_bp.real() + rb.energy_bp.imag()) < 1e-10);
    // theta_0 evaluated at lambda_bp is theta itself.
    CHECK(std::abs(critical_angle(with_lambda(p, rb.lambda_bp), 0).raw - p.theta) < 1e-10);
}

TEST_CASE("lambda_window: both forms of lambda_0 agree on a dense theta grid") {
    ModelParams p;
    for (int i = 1; i <= 1000; ++i) {
        p.theta = (kPi / 4.0) * i / 1001.0;
        const auto rb = lambda_window(p);
        CHECK(std::abs(rb.lambda0_plus - rb.lambda0_plus_tan_form) <= 1e-14 * std::max(1.0, rb.lambda0_plus) * 8);
        CHECK(std::abs(rb.lambda0_minus - rb.lambda0_minus_tan_form) <= 1e-14 * std::max(1.0, rb.lambda0_plus) * 8);
        CHECK(std::abs(rb.lambda_bp - rb.lambda0_plus) <= 1e-14 * std::max(1.0, rb.lambda0_plus) * 4);
    }
}

TEST_CASE("lambda_window: consistency with the resonance spectrum") {
    ModelParams p;
    for (double th = 0.02; th < kPi / 4; th += 0.01) {
        p.theta = th;
        const auto rb = lambda_window(p);
        const ModelParams at_bp = with_lambda(p, rb.lambda_bp);
        CHECK(std::abs(resonance_energy(at_bp, 0).energy - rb.energy_bp) < 1e-12);
        CHECK(std::abs(critical_angle(at_bp, 0).quadrant_corrected - th) < 1e-12);
    }
}

TEST_CASE("lambda_window: lambda_0+ below lambda_1+ for small theta") {
    ModelParams p;
    for (double th = 0.05; th < 0.35; th += 1e-3) {
        p.theta = th;
        const auto rb = lambda_window(p);
        CHECK(rb.lambda0_plus < rb.lambda1_plus);
        CHECK(rb.admissible(0.5 * (rb.lambda0_plus + rb.lambda1_plus)));
    }
}

TEST_CASE("lambda_window: lambda_1 bounds match the numerical theta_1 contact") {
    ModelParams p;
    for (double th : {kPi / 8.0, kPi / 6.0, 0.2, 0.6}) {
        p.theta = th;
        const auto rb = lambda_window(p);
        const double hi = contact_root(p, 1, rb.lambda1_minus * 1.0001, 1e6);
        CHECK(hi == doctest::Approx(rb.lambda1_plus).epsilon(1e-10));
    }
}

TEST_CASE("lambda_window: theta -> pi/4 limit and domain") {
    ModelParams p;
    p.theta = kPi / 4.0 - 1e-9;
    CHECK(lambda_window(p).lambda0_plus == doctest::Approx(0.25).epsilon(1e-7));
    p.theta = kPi / 4.0;
    CHECK_THROWS_AS(lambda_window(p), DomainError);
    p.theta = 0.0;
    CHECK_THROWS_AS(lambda_window(p), DomainError);
}
