#pragma once

#include <vector>

#include "csm/model.hpp"

namespace csm {

// Default truncation |beta x| <= 12 with 2049 uniform points.
inline constexpr double kDefaultXMax = 12.0;
inline constexpr int kDefaultGridPoints = 2049;

std::vector<double> default_grid(const ModelParams& p, double beta_xmax = kDefaultXMax,
                                 int points = kDefaultGridPoints);

struct WaveField {
    std::vector<double> grid;
    std::vector<cplx> values;
    // psi ~ exp(mu |x|) on each side; the dominant exponent is kept.
    cplx tail_plus;
    cplx tail_minus;
    ModelParams params;  // carries lambda and theta
    cplx k;
};

// Unnormalized solution cosh(w)^{-kappa} F(kappa - s, kappa + s + 1; kappa + 1; u),
// w = beta x e^{i theta}, u = (1 - tanh w)/2, continued along real x.
cplx psi_at(const ModelParams& p, cplx k, double x);

// Second x-derivative via the hypergeometric ODE is not exposed; callers use finite differences.
WaveField eval_wavefunction(const ModelParams& p, cplx k, const std::vector<double>& grid);
WaveField eval_wavefunction(const ModelParams& p, cplx k);

// psi(x') ~ 4^{kappa/2} e^{ikx'} at +inf and 4^{kappa/2} [refl e^{-ikx'} + trans_like e^{ikx'}]
// at -inf.
struct AsymptoticCoefficients {
    cplx refl;
    cplx trans_like;
};

AsymptoticCoefficients asymptotic_coefficients(const ModelParams& p, cplx k);
// i sin(pi s) / sinh(pi k / beta): equal to refl.
cplx refl_sinh_form(const ModelParams& p, cplx k);

struct TailTerm {
    cplx coef;
    cplx mu;  // coef exp(mu |x|)
};

// Asymptotic form of psi on the x > 0 (plus) or x < 0 side; terms with a coefficient below
// 1e-13 of the largest are dropped.
std::vector<TailTerm> tail_terms(const ModelParams& p, cplx k, bool plus);

// Full asymptotic form evaluated at finite x.
cplx psi_asymptotic(const ModelParams& p, cplx k, double x);

// trans_like(k); zero at resonances. PoleError at Gamma poles of the numerator.
cplx siegert_residual(const ModelParams& p, cplx k);
// trans_like(-k): zeros are the incoming-wave (anti-resonance) solutions, in the first
// quadrant for real lambda.
cplx anti_siegert_residual(const ModelParams& p, cplx k);

struct SiegertRoot {
    cplx k;
    cplx energy;
    int iterations = 0;
};

// Complex Newton, numerical derivative step 1e-7, at most 100 iterations, |dk| < 1e-12.
SiegertRoot siegert_root(const ModelParams& p, cplx guess, bool anti = false);

// Bilinear integral of psi^2 over the grid (Simpson) plus closed-form tails.
// NonNormalizable if a retained tail does not decay. With `abel` set, purely oscillating
// tails (Re = 0, non-zero frequency) are summed as exp(-0|x|) limits; used on the boundary.
cplx gamow_cnorm(const WaveField& field, bool abel = false);

enum class RegionLabel { ConvergentA, DivergentB, ScatteringBoundary };

const char* to_string(RegionLabel label);

// Re(i k e^{i theta}): negative when e^{ikx'} decays.
double region_functional(const ModelParams& p, cplx k);
RegionLabel classify_wavenumber(const ModelParams& p, cplx k);
// Classifies the n = 0 resonance at coupling lambda.
RegionLabel classify_region(const ModelParams& p, cplx lambda);
// n = 0 resonance wavenumber without the g = 1 check: beta/2 [sqrt(g-1) - i].
cplx resonance_k0(const ModelParams& p, cplx lambda);

}  // namespace csm
