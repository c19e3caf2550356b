#include "csm/specfun.hpp"

#include <array>
#include <cmath>

#include "csm/errors.hpp"

namespace csm {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kSeriesRadius = 0.5;
constexpr long kMaxTerms = 100000;
constexpr double kSeriesEps = 1e-17;
constexpr double kIntegerTol = 1e-6;
constexpr double kRichardsonStep = 1e-4;

// Lanczos sum for Re z >= 1/2.
cplx gamma_lanczos(cplx z) {
    z -= 1.0;
    cplx x = kLanczosCoef[0];
    for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) x += kLanczosCoef[i] / (z + double(i));
    const cplx t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * kPi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

bool near_nonpositive_integer(cplx z, long& n) {
    const double r = std::round(z.real());
    if (r > 0.0) return false;
    if (std::abs(z - cplx(r, 0.0)) > 1e-14 * std::max(1.0, std::abs(r))) return false;
    n = static_cast<long>(r);
    return true;
}

// Terminating case: one of the numerator parameters is a non-positive integer -n.
bool terminating_degree(cplx a, long& degree) {
    const double r = std::round(a.real());
    if (r > 0.0) return false;
    if (std::abs(a - cplx(r, 0.0)) > 1e-12 * std::max(1.0, std::abs(r))) return false;
    degree = static_cast<long>(-r);
    return true;
}

cplx polynomial_2f1(long degree, cplx b, cplx c, cplx u) {
    const double a = -double(degree);
    cplx term = 1.0;
    cplx sum = 1.0;
    for (long j = 0; j < degree; ++j) {
        term *= (a + double(j)) * (b + double(j)) / ((c + double(j)) * double(j + 1)) * u;
        sum += term;
    }
    return sum;
}

cplx series_2f1(cplx a, cplx b, cplx c, cplx u) {
    cplx term = 1.0;
    cplx sum = 1.0;
    int small = 0;
    for (long j = 0; j < kMaxTerms; ++j) {
        term *= (a + double(j)) * (b + double(j)) / ((c + double(j)) * double(j + 1)) * u;
        sum += term;
        if (std::abs(term) <= kSeriesEps * std::abs(sum)) {
            if (++small >= 2) return sum;
        } else {
            small = 0;
        }
        if (term == 0.0) return sum;
    }
    throw NonConvergence("hyp2f1 power series", kMaxTerms, std::abs(term));
}

cplx connection_1mu(cplx a, cplx b, cplx c, cplx u, cplx log1mu) {
    const cplx w = 1.0 - u;
    const cplx d = c - a - b;
    const cplx g_c = complex_gamma(c);
    const cplx t1 = g_c * complex_gamma(d) * rgamma(c - a) * rgamma(c - b) *
                    series_2f1(a, b, 1.0 - d, w);
    const cplx t2 = std::exp(d * log1mu) * g_c * complex_gamma(-d) * rgamma(a) * rgamma(b) *
                    series_2f1(c - a, c - b, 1.0 + d, w);
    return t1 + t2;
}

cplx evaluate(cplx a, cplx b, cplx c, cplx u, cplx log1mu);

// c - a - b within kIntegerTol of an integer: the two connection terms blow up and cancel.
// Average symmetric imaginary perturbations of c, then Richardson-extrapolate in h^2.
cplx degenerate_connection(cplx a, cplx b, cplx c, cplx u, cplx log1mu) {
    auto sym = [&](double h) {
        const cplx dc(0.0, h);
        return 0.5 * (connection_1mu(a, b, c + dc, u, log1mu) +
                      connection_1mu(a, b, c - dc, u, log1mu));
    };
    const double h = kRichardsonStep;
    return (4.0 * sym(h) - sym(2.0 * h)) / 3.0;
}

cplx evaluate(cplx a, cplx b, cplx c, cplx u, cplx log1mu) {
    long degree = 0;
    if (terminating_degree(a, degree)) return polynomial_2f1(degree, b, c, u);
    if (terminating_degree(b, degree)) return polynomial_2f1(degree, a, c, u);
    long pole = 0;
    if (near_nonpositive_integer(c, pole)) throw PoleError(pole);
    if (u == 0.0) return 1.0;

    const double mu = std::abs(u);
    const double m1u = std::abs(1.0 - u);
    const cplx pfaff_arg = u / (u - 1.0);
    const double mpf = std::abs(pfaff_arg);

    auto use_series = [&] { return series_2f1(a, b, c, u); };
    auto use_connection = [&] {
        const cplx d = c - a - b;
        if (std::abs(d - std::round(d.real())) < kIntegerTol)
            return degenerate_connection(a, b, c, u, log1mu);
        return connection_1mu(a, b, c, u, log1mu);
    };
    // Pfaff: F(a,b;c;u) = (1-u)^{-a} F(a, c-b; c; u/(u-1)).
    auto use_pfaff = [&] { return std::exp(-a * log1mu) * series_2f1(a, c - b, c, pfaff_arg); };

    // Tie-break |u| ~ |1-u| in favour of the smaller argument.
    if (mu <= kSeriesRadius && mu <= m1u) return use_series();
    if (m1u <= kSeriesRadius) return use_connection();
    if (mpf <= kSeriesRadius) return use_pfaff();
    // Outside every disk of radius r0: pick the smallest argument (all < 1 on the contract domain).
    if (mu <= m1u && mu <= mpf) return use_series();
    if (m1u <= mpf) return use_connection();
    return use_pfaff();
}

}  // namespace

cplx complex_gamma(cplx z) {
    long pole = 0;
    if (near_nonpositive_integer(z, pole)) throw PoleError(pole);
    if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * gamma_lanczos(1.0 - z));
    return gamma_lanczos(z);
}

cplx rgamma(cplx z) {
    long pole = 0;
    if (near_nonpositive_integer(z, pole)) return 0.0;
    if (z.real() < 0.5) return std::sin(kPi * z) * gamma_lanczos(1.0 - z) / kPi;
    return 1.0 / gamma_lanczos(z);
}

cplx log1p(cplx z) {
    if (std::abs(z) < 1e-4) {
        // z - z^2/2 + z^3/3 - z^4/4 + z^5/5
        return z * (1.0 + z * (-0.5 + z * (1.0 / 3.0 + z * (-0.25 + z * 0.2))));
    }
    return std::log(1.0 + z);
}

cplx hyp2f1(const HyperParams& p) { return evaluate(p.a, p.b, p.c, p.u, std::log(1.0 - p.u)); }

cplx hyp2f1(const HyperParams& p, cplx log_one_minus_u) {
    return evaluate(p.a, p.b, p.c, p.u, log_one_minus_u);
}

cplx expint_e(int p, cplx z) {
    if (p < 1) throw DomainError("expint_e requires p >= 1");
    if (z.real() < -1e-14 * std::abs(z)) throw DomainError("expint_e requires Re z >= 0");
    const double az = std::abs(z);
    if (az == 0.0) {
        if (p == 1) throw DomainError("E_1(0) diverges");
        return 1.0 / double(p - 1);
    }
    if (az < 1.5) {
        // E_1 by its power series, then upward recurrence E_{n+1} = (e^{-z} - z E_n) / n.
        constexpr double euler_gamma = 0.57721566490153286061;
        cplx sum = 0.0;
        cplx term = 1.0;
        for (int n = 1; n < 200; ++n) {
            term *= -z / double(n);
            const cplx add = -term / double(n);
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) break;
        }
        cplx e = -euler_gamma - std::log(z) + sum;
        const cplx ez = std::exp(-z);
        for (int n = 1; n < p; ++n) e = (ez - z * e) / double(n);
        return e;
    }
    // Modified Lentz continued fraction.
    const double tiny = 1e-300;
    cplx b = z + double(p);
    cplx c = 1.0 / tiny;
    cplx d = 1.0 / b;
    cplx h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -double(i) * double(p - 1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const cplx del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-z);
    }
    throw NonConvergence("expint_e continued fraction", 100000, 0.0);
}

}  // namespace csm
