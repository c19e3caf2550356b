#include <cmath>
#include <random>

#include "csm/binbasis.hpp"
#include "csm/errors.hpp"
#include "doctest.h"

using namespace csm;

namespace {

const cplx I(0.0, 1.0);
// sigma_min at lambda - lambda_bp = 1e-2 u_A, theta = pi/6, alpha = {-1, 0, 1}; regression value
constexpr double kSigmaGolden = 0.0374279534313396;

double max_dev(const OverlapMatrix& m, const std::vector<cplx>& diag) {
    double e = 0.0;
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        for (std::size_t j = 0; j < m.entries[i].size(); ++j)
            e = std::max(e, std::abs(m.entries[i][j] - (i == j ? diag[i] : cplx(0.0))));
    return e;
}

ModelParams hermitian() {
    ModelParams p;
    p.lambda = 1.0;
    p.theta = 0.0;
    return p;
}

std::vector<BinnedState> all_bins(const ModelParams& p, const BinGrid& g, const std::vector<double>& x) {
    std::vector<BinnedState> out;
    for (std::size_t n = 0; n < g.size(); ++n) out.push_back(binned_state(p, g, n, x));
    return out;
}

struct Studied {
    double s_err, h_err, neighbour;
};

Studied study(const ModelParams& p, const ContourSpec& spec, double bx, int points) {
    const auto x = default_grid(p, bx, points);
    const auto states = all_bins(p, build_bins(p, spec, 6), x);
    std::vector<cplx> ones(states.size(), 1.0), eps;
    for (const auto& s : states) eps.push_back(s.energy);
    const auto S = overlap_matrix(p, states, x);
    double nb = 0.0;
    for (std::size_t i = 0; i + 1 < states.size(); ++i)
        nb = std::max({nb, std::abs(S.entries[i][i + 1]), std::abs(S.entries[i + 1][i])});
    return {max_dev(S, ones), max_dev(hamiltonian_matrix(p, states, x), eps), nb};
}

StateVector scaled(StateVector s, cplx c) {
    for (auto& v : s.values) v *= c;
    for (auto* side : {&s.discrete_plus, &s.discrete_minus})
        for (auto& t : *side) t.coef *= c;
    for (auto* side : {&s.cont_plus, &s.cont_minus})
        for (auto& t : *side) t.weight = [w = t.weight, c](cplx k) { return c * w(k); };
    return s;
}

}  // namespace

TEST_CASE("build_bins examples") {
    ModelParams p;
    const auto g = build_bins(p, RealAxis{0.0, 2.0}, 4);
    REQUIRE(g.size() == 4);
    for (int i = 0; i <= 4; ++i) CHECK(std::abs(g.nodes[i] - cplx(0.5 * i)) < 1e-15);
    CHECK(std::abs(g.width(2) - 0.5) < 1e-15);
    CHECK_THROWS_AS(build_bins(p, RealAxis{0.0, 2.0}, 0), EmptyRange);

    p.theta = kPi / 6.0;
    const auto rb = lambda_window(p);
    const cplx lam = rb.lambda_bp + 1e-4 * std::exp(I * kPi / 3.0);
    const auto e = build_bins(p, EpRay{lam, {0.0, 1.0, 2.0}}, 0);
    REQUIRE(e.size() == 2);
    for (int n = 0; n < 3; ++n)
        CHECK(std::abs(e.nodes[n] - (rb.k_bp + double(n) * 1e-2 * std::exp(I * kPi / 6.0))) < 1e-14);

    const auto r = build_bins(p, RotatedRay{1.0, 2.0}, 2);
    CHECK(std::abs(r.nodes[1] - 1.5 * std::exp(-I * p.theta)) < 1e-15);
}

TEST_CASE("bin energy closed form against Simpson") {
    ModelParams p;
    CHECK(std::abs(bin_energy(p, 0.0, 1.0) - 1.0 / 6.0) < 1e-15);
    CHECK(std::abs(bin_energy(p, 1.0, 1.0 + 1e-7) - 0.5) < 1e-6);
    CHECK(std::abs(bin_energy(p, 1.0, 1.0 + 1e-10) - 0.5) < 1e-9);
    // Simpson is exact on k^2
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    p.m = 1.7;
    p.hbar = 0.8;
    for (int t = 0; t < 50; ++t) {
        const cplx a(u(rng), t % 2 ? u(rng) : 0.0), b(u(rng), t % 2 ? u(rng) : 0.0);
        auto e = [&](cplx k) { return p.hbar * p.hbar * k * k / (2.0 * p.m); };
        const cplx ref = (e(a) + 4.0 * e(0.5 * (a + b)) + e(b)) / 6.0;
        CHECK(std::abs(bin_energy(p, a, b) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("free bin is the direct plane-wave integral") {
    ModelParams p;
    p.lambda = 0.0;
    p.theta = 0.0;
    const auto x = default_grid(p, 40.0, 801);
    const auto g = build_bins(p, RealAxis{0.7, 1.3}, 1);
    const auto b = binned_state(p, g, 0, x);
    const double dk = 0.6, c = 1.0 / std::sqrt(2.0 * kPi * dk);
    double worst = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const cplx ref = x[i] == 0.0 ? cplx(dk * c)
                                     : c * (std::exp(I * 1.3 * x[i]) - std::exp(I * 0.7 * x[i])) / (I * x[i]);
        worst = std::max(worst, std::abs(b.right.values[i] - ref));
        if (std::abs(x[i]) > 10.0) tail = std::max(tail, std::abs(x[i] * b.right.values[i]));
    }
    CHECK(worst < 1e-10);
    CHECK(std::abs(b.right.values[x.size() / 2] - std::sqrt(dk / (2.0 * kPi))) < 1e-12);
    CHECK(tail <= 2.0 * c + 1e-9);  // 1/x decay
}

TEST_CASE("Hermitian partner is the conjugate") {
    const auto p = hermitian();
    const auto x = default_grid(p, 8.0, 257);
    const auto b = binned_state(p, build_bins(p, RealAxis{0.5, 2.0}, 3), 1, x);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(b.partner.values[i] - std::conj(b.right.values[i])));
    CHECK(e < 1e-9);
}

TEST_CASE("Hermitian bins are orthonormal and diagonalize H") {
    const auto r = study(hermitian(), RealAxis{0.5, 2.0}, kDefaultXMax, kDefaultGridPoints);
    MESSAGE("S err " << r.s_err << ", H err " << r.h_err);
    CHECK(r.s_err < 1e-5);
    CHECK(r.h_err < 1e-5);
    CHECK(r.neighbour < 1e-6);
}

TEST_CASE("delta-normalization error falls under refinement") {
    const auto p = hermitian();
    const std::pair<double, int> levels[] = {{2.0, 129}, {3.0, 257}, {4.0, 513}, {6.0, 769}};
    double prev = 1e300;
    for (const auto& [bx, n] : levels) {
        const double e = study(p, RealAxis{0.5, 2.0}, bx, n).s_err;
        MESSAGE("X = " << bx << ": " << e);
        CHECK(e < 0.5 * prev);
        prev = e;
    }
}

TEST_CASE("complex-scaled bins") {
    ModelParams p;
    p.lambda = 1.0;
    p.theta = 0.3;
    const auto x = default_grid(p);
    const auto states = all_bins(p, build_bins(p, RotatedRay{0.5, 2.0}, 6), x);
    std::vector<cplx> ones(6, 1.0), eps;
    for (const auto& s : states) eps.push_back(s.energy);
    const auto S = overlap_matrix(p, states, x);
    const auto H = hamiltonian_matrix(p, states, x);
    CHECK(max_dev(S, ones) < 1e-8);
    double d = 0.0;
    for (std::size_t n = 0; n < 6; ++n) d = std::max(d, std::abs(H.entries[n][n] - eps[n]));
    CHECK(d < 1e-8);

    SUBCASE("bilinear, not sesquilinear") {
        const cplx c(0.3, -1.7);
        const cplx base = bilinear(p, states[1].partner, states[2].right, x);
        const cplx diag = bilinear(p, states[2].partner, states[2].right, x);
        CHECK(std::abs(bilinear(p, scaled(states[2].partner, c), states[2].right, x) - c * diag) < 1e-12);
        CHECK(std::abs(bilinear(p, states[1].partner, scaled(states[2].right, c), x) - c * base) < 1e-12);
    }
}

TEST_CASE("resonance is orthogonal to bins deep in region A") {
    ModelParams p;
    p.lambda = 3.0;
    p.theta = 0.6;
    REQUIRE(classify_region(p, p.lambda) == RegionLabel::ConvergentA);
    const auto x = default_grid(p);
    const auto res = resonance_state(p, x);
    const auto g = build_bins(p, RotatedRay{0.5, 2.0}, 6);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n)
        worst = std::max(worst, std::abs(bilinear(p, res, binned_state(p, g, n, x).right, x)));
    MESSAGE("max |<res|bin>| = " << worst);
    CHECK(worst < 1e-5);
    CHECK(std::abs(bilinear(p, res, res, x) - 1.0) < 1e-9);
}

TEST_CASE("degeneracy diagnostics near the branch point") {
    ModelParams p;
    p.theta = kPi / 6.0;
    const double lbp = lambda_window(p).lambda_bp;
    p.lambda = lbp;
    const auto x = default_grid(p);
    const cplx u = region_a_direction(p);
    CHECK(classify_region(p, lbp + 1e-3 * u) == RegionLabel::ConvergentA);
    CHECK(classify_region(p, lbp - 1e-3 * u) == RegionLabel::DivergentB);

    std::vector<cplx> lams;
    for (double e : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) lams.push_back(lbp + e * u);
    const auto d = degeneracy_diagnostics(p, lams, {-1.0, 0.0, 1.0}, x);
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i].sigma_min < d[i - 1].sigma_min);
    CHECK(d.front().sigma_min / d.back().sigma_min > 100.0);
    CHECK(d.front().sigma_min == doctest::Approx(kSigmaGolden).epsilon(1e-6));
    MESSAGE("sigma_min exponent " << std::log10(d[0].sigma_min / d[1].sigma_min));

    const auto far = degeneracy_diagnostics(p, {lbp + 0.5 * lbp * u}, {-1.0, 0.0, 1.0}, x);
    CHECK(far.front().sigma_min > 0.1);

    CHECK_THROWS_AS(degeneracy_diagnostics(p, {lbp - 1e-3 * u}, {-1.0, 0.0, 1.0}, x), PreconditionViolation);
}

TEST_CASE("limit exchange") {
    ModelParams p;
    p.theta = kPi / 6.0;
    const double lbp = lambda_window(p).lambda_bp;
    p.lambda = lbp;
    const auto x = default_grid(p);
    const cplx u = region_a_direction(p);
    std::vector<cplx> lams;
    for (double e : {1e-2, 1e-4, 1e-6}) lams.push_back(lbp + e * u);
    const auto le = limit_exchange(p, lams, 0.2, x);
    for (const auto& v : le.interior_entries) CHECK(std::abs(v) < 1e-4);
    CHECK(std::abs(le.limit_entry) > 0.1);
    CHECK(std::abs(le.limit_entry - 0.5 * (le.limit_side_a + le.limit_side_b)) < 1e-14);
}
