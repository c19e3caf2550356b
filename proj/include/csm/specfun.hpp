#pragma once

#include <complex>

namespace csm {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Gamma function for complex argument (Lanczos, g = 7, reflection for Re z < 1/2).
// Throws PoleError at non-positive integers.
cplx complex_gamma(cplx z);

// 1/Gamma(z); entire, so it returns exactly zero at the poles of Gamma instead of throwing.
cplx rgamma(cplx z);

// log(1 + z) without cancellation for small |z|.
cplx log1p(cplx z);

struct HyperParams {
    cplx a;
    cplx b;
    cplx c;
    cplx u;
};

// Gauss hypergeometric 2F1(a, b; c; u) on the principal sheet (cut along [1, inf)).
cplx hyp2f1(const HyperParams& p);

// Same function analytically continued along a path on which log(1 - u) has been tracked
// continuously by the caller. Only the (1 - u)^(c - a - b) branch of the u -> 1 - u
// connection formula and the Pfaff prefactor depend on the sheet, and both use
// `log_one_minus_u` instead of the principal logarithm.
cplx hyp2f1(const HyperParams& p, cplx log_one_minus_u);

// Generalized exponential integral E_p(z) = int_1^inf e^{-zt} t^{-p} dt, p >= 1, Re z >= 0.
cplx expint_e(int p, cplx z);

}  // namespace csm
