#pragma once

#include "csm/specfun.hpp"

namespace csm {

// Physical constants, coupling and scaling angle of the complex-scaled inverted
// Rosen-Morse barrier  V(x') = lambda / cosh^2(beta x'),  x' = x e^{i theta}.
struct ModelParams {
    double m = 1.0;
    double hbar = 1.0;
    double beta = 1.0;
    cplx lambda{1.0, 0.0};
    double theta = 0.4;

    // hbar^2 beta^2 / (8 m): the energy unit of the closed-form spectrum.
    double energy_unit() const { return hbar * hbar * beta * beta / (8.0 * m); }
    // g = 8 m lambda / (beta^2 hbar^2).
    cplx coupling() const { return lambda / energy_unit(); }

    // Throws DomainError. theta = 0 (the unscaled, Hermitian problem) is accepted only
    // when allow_unscaled is set.
    void validate(bool allow_unscaled = false) const;
};

ModelParams with_lambda(ModelParams p, cplx lambda);
ModelParams with_theta(ModelParams p, double theta);

struct DerivedQuantities {
    cplx g;  // 8 m lambda / (beta^2 hbar^2)
    cplx s;  // (-1 + sqrt(1 - g)) / 2, principal root
};

DerivedQuantities derive(const ModelParams& p);

// kappa = -i k / beta, the hypergeometric index used throughout the wave function code.
inline cplx kappa_of_k(const ModelParams& p, cplx k) { return cplx(0.0, -1.0) * k / p.beta; }
// Wavenumber of an energy on the principal branch, k = sqrt(2 m E) / hbar.
cplx wavenumber(const ModelParams& p, cplx energy);

struct ResonancePole {
    int n = 0;
    cplx energy;
    cplx k;      // sqrt(2 m E) / hbar, principal branch
    cplx kappa;  // -i k / beta; satisfies kappa + s + 1 = -n
    double width = 0.0;  // -2 Im E
};

// Closed-form resonance E_n = (hbar^2 beta^2 / 8m) [sqrt(g - 1) - i(2n+1)]^2.
// Independent of theta. Throws DegenerateIndex when g = 1.
ResonancePole resonance_energy(const ModelParams& p, int n);

struct CriticalAngle {
    double raw = 0.0;                 // (1/2) arctan(-Im E / Re E), single branch
    double quadrant_corrected = 0.0;  // (1/2) atan2(-Im E, Re E)
    bool undefined = false;           // Re E = 0: raw is reported as pi/4
};

// Angle at which the n-th pole touches the rotated continuum.
CriticalAngle critical_angle(const ModelParams& p, int n);

// Bounds on real lambda for theta_0 < theta < theta_1, and the branch point.
struct RegionBounds {
    double theta = 0.0;
    double lambda0_minus = 0.0;
    double lambda0_plus = 0.0;
    double lambda0_minus_tan_form = 0.0;  // the bracketed tan 2theta expression
    double lambda0_plus_tan_form = 0.0;
    double lambda1_minus = 0.0;
    double lambda1_plus = 0.0;
    double lambda_bp = 0.0;  // (beta^2 hbar^2 / 4m) / (1 - cos 2theta), equal to lambda0_plus
    cplx energy_bp;
    cplx k_bp;

    // (lambda < l0- or l0+ < lambda) and l1- < lambda < l1+
    bool admissible(double lambda) const;
};

// Evaluated at p.theta; p.lambda is ignored.
RegionBounds lambda_window(const ModelParams& p);

}  // namespace csm
