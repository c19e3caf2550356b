#include "csm/model.hpp"

#include <cmath>
#include <sstream>

#include "csm/errors.hpp"

namespace csm {

void ModelParams::validate(bool allow_unscaled) const {
    if (!(m > 0.0) || !(hbar > 0.0) || !(beta > 0.0))
        throw DomainError("m, hbar and beta must be positive");
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        throw DomainError("lambda must be finite");
    const bool lower_ok = allow_unscaled ? theta >= 0.0 : theta > 0.0;
    if (!lower_ok || !(theta < kPi / 4.0)) {
        std::ostringstream os;
        os << "theta = " << theta << " outside " << (allow_unscaled ? "[0" : "(0") << ", pi/4)";
        throw DomainError(os.str());
    }
}

ModelParams with_lambda(ModelParams p, cplx lambda) {
    p.lambda = lambda;
    return p;
}

ModelParams with_theta(ModelParams p, double theta) {
    p.theta = theta;
    return p;
}

DerivedQuantities derive(const ModelParams& p) {
    const cplx g = p.coupling();
    // i sqrt(g - 1) rather than sqrt(1 - g): same root off the real axis, and for real
    // g > 1 it does not depend on the sign of a zero imaginary part.
    return {g, 0.5 * (-1.0 + cplx(0.0, 1.0) * std::sqrt(g - 1.0))};
}

cplx wavenumber(const ModelParams& p, cplx energy) {
    return std::sqrt(2.0 * p.m * energy) / p.hbar;
}

ResonancePole resonance_energy(const ModelParams& p, int n) {
    if (n < 0) throw DomainError("resonance index must be non-negative");
    const cplx g = p.coupling();
    if (std::abs(g - 1.0) < 1e-12) throw DegenerateIndex("8 m lambda / (beta hbar)^2 = 1: s is a double root");
    const cplx bracket = std::sqrt(g - 1.0) - cplx(0.0, 2.0 * n + 1.0);
    ResonancePole pole;
    pole.n = n;
    pole.energy = p.energy_unit() * bracket * bracket;
    pole.k = 0.5 * p.beta * bracket;
    pole.kappa = kappa_of_k(p, pole.k);
    pole.width = -2.0 * pole.energy.imag();
    return pole;
}

CriticalAngle critical_angle(const ModelParams& p, int n) {
    const cplx e = resonance_energy(p, n).energy;
    CriticalAngle out;
    out.quadrant_corrected = 0.5 * std::atan2(-e.imag(), e.real());
    if (std::abs(e.real()) <= 1e-15 * std::abs(e)) {
        out.undefined = true;
        out.raw = kPi / 4.0;
        return out;
    }
    out.raw = 0.5 * std::atan(-e.imag() / e.real());
    return out;
}

bool RegionBounds::admissible(double lambda) const {
    return (lambda < lambda0_minus || lambda0_plus < lambda) && lambda1_minus < lambda &&
           lambda < lambda1_plus;
}

RegionBounds lambda_window(const ModelParams& p) {
    p.validate();
    const double unit = p.hbar * p.hbar * p.beta * p.beta / (4.0 * p.m);
    const double th = p.theta;
    const double s2 = std::sin(2.0 * th);
    const double t2 = std::tan(2.0 * th) * std::tan(2.0 * th);

    RegionBounds rb;
    rb.theta = th;
    // 1 -+ cos 2theta written as 2 sin^2, 2 cos^2 to avoid cancellation at small theta.
    const double one_m_c2 = 2.0 * std::sin(th) * std::sin(th);
    const double one_p_c2 = 2.0 * std::cos(th) * std::cos(th);
    rb.lambda0_plus = unit * one_p_c2 / (s2 * s2);
    rb.lambda0_minus = unit * one_m_c2 / (s2 * s2);

    const double a0 = (1.0 + t2) / t2;
    const double r0 = std::sqrt(a0 * a0 - a0);
    rb.lambda0_plus_tan_form = unit * (a0 + r0);
    rb.lambda0_minus_tan_form = unit * a0 / (a0 + r0);  // a0 - r0, rationalized

    // Literal form: (9 + 5 t^2)/t^2 inside the square, (9 + 25 t^2)/t^2 subtracted.
    const double a1 = (9.0 + 5.0 * t2) / t2;
    const double r1 = std::sqrt(a1 * a1 - (9.0 + 25.0 * t2) / t2);
    rb.lambda1_plus = unit * (a1 + r1);
    rb.lambda1_minus = unit * (a1 - r1);

    rb.lambda_bp = unit / one_m_c2;
    rb.energy_bp = resonance_energy(with_lambda(p, rb.lambda_bp), 0).energy;
    rb.k_bp = wavenumber(p, rb.energy_bp);
    return rb;
}

}  // namespace csm
