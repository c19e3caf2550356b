#pragma once

#include <limits>
#include <string>
#include <vector>

#include "csm/wavefun.hpp"

namespace csm {

// ---- E_+- sheets ---------------------------------------------------------------------
//
// The pair is defined by the EP-adapted bins k_n = k_bp + alpha'_n sqrt(lambda - lambda_bp):
// E_+ is the bin energy of the last bin, E_- that of the first. For a symmetric alpha' list
// the two swap when sqrt(lambda - lambda_bp) changes sign.

inline const std::vector<double> kDefaultAlpha{-1.0, 0.0, 1.0};

struct TracePoint {
    cplx lambda;
    cplx delta;      // sqrt(lambda - lambda_bp), continued along the path
    cplx e_plus;
    cplx e_minus;
    cplx resonance;  // closed-form E_0, analytic at lambda_bp
};

// Continues sqrt(lambda - lambda_bp) by nearest-value selection, starting from the principal
// root. BranchCollision if a step moves the root by more than half its distance from 0
// (or lands on lambda_bp). DomainError if the path touches g = 1.
std::vector<TracePoint> trace_resonance(const ModelParams& p, const std::vector<cplx>& path,
                                        const std::vector<double>& alpha = kDefaultAlpha);

struct PuiseuxFit {
    cplx alpha;          // E_+ - E_bp ~ alpha sqrt(lambda - lambda_bp)
    cplx intercept;      // constant term of the fixed-exponent fit
    double exponent = 0; // free log-log slope
    double residual = 0; // relative rms of the fixed-exponent fit
};

// Samples |lambda - lambda_bp| log-uniformly on [r_min, r_max] along the middle of the
// region-A arc. PreconditionViolation outside (1e-8, 1e-2) lambda_bp; IllConditionedFit for
// fewer than 3 samples or a degenerate window.
PuiseuxFit fit_puiseux(const ModelParams& p, double r_min, double r_max, int samples = 9,
                       const std::vector<double>& alpha = kDefaultAlpha);

// ---- Berry loop ----------------------------------------------------------------------

struct LoopSpec {
    double radius = 1e-6;  // R, lambda = lambda_bp + R e^{i(start_phase + phi)}
    int n_steps = 128;     // per 2 pi
    int windings = 4;      // negative: clockwise
    // lambda-plane angle of the start; NaN selects lambda^- = 2 pi - 2 theta, the boundary
    // point after which E_+ enters region A.
    double start_phase = std::numeric_limits<double>::quiet_NaN();
    bool resonance_on_plus = true;  // false: start on the other sheet (sqrt -> -sqrt)
    std::vector<double> alpha = kDefaultAlpha;
    double x_ref = 10.0;   // phase readout at x = x_ref / beta
    int readout_points = 201;  // uniform grid on [-x_ref, x_ref] / beta for overlaps
};

struct LoopRecord {
    double phi = 0.0;
    cplx lambda;
    cplx e_plus, e_minus;
    RegionLabel region = RegionLabel::ScatteringBoundary;
    cplx connection;       // product of connection factors applied so far
    cplx overall;          // psi(phi, x_ref) / psi(0, x_ref)
    double unwrapped_phase = 0.0;  // of psi(phi, x_ref)
};

struct LoopTrace {
    std::vector<LoopRecord> records;
    std::vector<double> crossings;     // phi of each A/B boundary crossing (bisected)
    std::vector<cplx> winding_overlap; // <psi(0)|psi(2 pi w)> / <psi(0)|psi(0)>, w = 1..|windings|
    int monodromy_order = 0;           // smallest w with overlap +1 within 1e-3; 0 if none
    double max_phase_deviation = 0.0;  // max |unwrapped phase - phase(0) - phi/4|
};

// Continues the sum of the EP-adapted binned states around lambda_bp with sqrt(lambda -
// lambda_bp) and sqrt(dk) continued by nearest value. A factor i (-i clockwise) is applied
// at each crossing of the E_+ sheet through the A/B boundary.
// DomainError on bad spec, PreconditionViolation if the start is off the boundary or the
// Taylor bound |(-i ln4 / 2beta + i x') dalpha' sqrt R| < 0.1 fails at x' = x_ref e^{i theta},
// StepTooCoarse if the readout phase jumps by more than pi/4 in one step.
LoopTrace run_berry_loop(const ModelParams& p, const LoopSpec& spec);

struct AsymptoticPhase {
    std::vector<double> phi;
    std::vector<cplx> factor;  // binned state / leading phi-independent exponential
    cplx ratio_2pi;            // factor(2 pi) / factor(0)
};

// Overall factor of the continued binned state at x = +x_ref (Case I, plus = true) or
// -x_ref (Case II) computed from the asymptotic forms. Case II keeps the reflected term
// refl(k) 4^{kappa/2} e^{-ikx'} and drops trans_like.
AsymptoticPhase case_asymptotic_phase(const ModelParams& p, const LoopSpec& spec, bool plus);

// CSV: phi, re_lambda, im_lambda, re_E_plus, im_E_plus, re_E_minus, im_E_minus, region,
// re_factor, im_factor, unwrapped_phase
std::string loop_trace_csv(const LoopTrace& trace);

}  // namespace csm
