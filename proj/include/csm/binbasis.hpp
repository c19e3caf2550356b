#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "csm/wavefun.hpp"

namespace csm {

// ---- contours ------------------------------------------------------------------------

struct RealAxis {
    double kmin = 0.0;
    double kmax = 1.0;
};
// Segment of the rotated continuum, k = q e^{-i theta}, q in [qmin, qmax].
struct RotatedRay {
    double qmin = 0.0;
    double qmax = 1.0;
};
// k_n = k_bp + alpha_n sqrt(lambda - lambda_bp), principal root.
struct EpRay {
    cplx lambda;
    std::vector<double> alpha;
};
using ContourSpec = std::variant<RealAxis, RotatedRay, EpRay>;

struct BinGrid {
    std::vector<cplx> nodes;
    std::size_t size() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    cplx width(std::size_t n) const { return nodes.at(n + 1) - nodes.at(n); }
};

// n_bins is ignored for EpRay (alpha.size() - 1 bins). EmptyRange for zero bins.
BinGrid build_bins(const ModelParams& p, const ContourSpec& spec, int n_bins);

// ---- k-integration paths -------------------------------------------------------------

// A pole to steer around. The path leaves the straight segment on the side opposite to the
// pole; when the pole sits on the segment it is treated as displaced along `side`.
struct PoleAvoid {
    cplx location;
    cplx side;
};

// int_path f dk ~ sum_j weights[j] f(nodes[j]), path from ka to kb.
struct KPath {
    std::vector<cplx> nodes;
    std::vector<cplx> weights;
};

// Graded Gauss-Legendre panels toward nearby poles; a semicircular detour of radius
// <= |kb - ka|/4 around a pole closer to the segment interior than half that radius.
// QuadratureError if two poles pinch the path from opposite sides.
KPath make_path(cplx ka, cplx kb, const std::vector<PoleAvoid>& poles, int order, int max_phase_panels = 1);

// ---- continuum states ----------------------------------------------------------------

// phi(k, x) = e^{i theta/2} psi(k, x') / (4^{kappa/2} trans_like(k) sqrt(2 pi)).
cplx continuum_phi(const ModelParams& p, cplx k, double x);
// e^{i theta/2} / (trans_like(k) sqrt(2 pi)): amplitude of e^{ikx'} at +inf.
cplx continuum_amplitude(const ModelParams& p, cplx k);

// A state known on the grid and, beyond it, as sums of exponentials in |x|.
// continuous pieces: int_path w(k) e^{gamma k |x|} dk, discrete pieces: coef e^{mu |x|}.
struct ContinuousTail {
    cplx ka, kb;
    cplx gamma;
    std::function<cplx(cplx)> weight;
    std::vector<PoleAvoid> poles;
};

struct StateVector {
    std::string label;
    std::vector<cplx> values;
    std::vector<TailTerm> discrete_plus, discrete_minus;
    std::vector<ContinuousTail> cont_plus, cont_minus;
};

struct BinnedState {
    std::size_t index = 0;
    cplx ka, kb;
    cplx energy;            // closed-form bin-averaged k^2 hbar^2 / 2m
    StateVector right;      // (1/sqrt dk) int phi(k) dk
    StateVector partner;    // (1/sqrt dk) int phi(-k) dk
    StateVector h_right;    // (1/sqrt dk) int E(k) phi(k) dk
};

// (hbar^2/2m)(ka^2 + ka kb + kb^2)/3
cplx bin_energy(const ModelParams& p, cplx ka, cplx kb);

struct BinOptions {
    // Side to which a pole lying exactly on a bin is assigned (default: the region-A side).
    bool pole_side_region_a = true;
    double tolerance = 1e-9;  // successive-order agreement of the k-quadrature
    int max_order = 96;
};

BinnedState binned_state(const ModelParams& p, const BinGrid& grid, std::size_t n,
                         const std::vector<double>& spatial_grid, const BinOptions& opt = {});

// c-normalized n = 0 resonance (psi / sqrt(c-norm)), discrete tails. With abel set,
// boundary (oscillating) tails are accepted.
StateVector resonance_state(const ModelParams& p, const std::vector<double>& spatial_grid, bool abel = false);
// Unnormalized psi(k, x) as a StateVector.
StateVector plain_state(const ModelParams& p, cplx k, const std::vector<double>& spatial_grid);

// ---- overlaps ------------------------------------------------------------------------

struct OverlapMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<cplx>> entries;
};

// Bilinear int left(x) right(x) dx: Simpson on the grid plus closed-form tails beyond it.
// Oscillating tails are summed in the exp(-0|x|) (Abel) sense.
cplx bilinear(const ModelParams& p, const StateVector& left, const StateVector& right,
              const std::vector<double>& spatial_grid);

OverlapMatrix overlap_matrix(const ModelParams& p, const std::vector<BinnedState>& states,
                             const std::vector<double>& spatial_grid);
OverlapMatrix hamiltonian_matrix(const ModelParams& p, const std::vector<BinnedState>& states,
                                 const std::vector<double>& spatial_grid);
OverlapMatrix overlap_matrix(const ModelParams& p, const std::vector<StateVector>& left,
                             const std::vector<StateVector>& right, const std::vector<double>& spatial_grid);

// ---- EP diagnostics ------------------------------------------------------------------

// Direction of lambda - lambda_bp that moves the resonance into region A fastest.
cplx region_a_direction(const ModelParams& p);

struct DegeneracyPoint {
    cplx lambda;
    double sigma_min = 0.0;
    double condition = 0.0;
    std::vector<double> singular_values;
    OverlapMatrix bilinear_overlap;  // resonance and bins, rows = partners
};

// For each lambda: L2-normalized columns {resonance, EP-adapted bins k_bp + alpha sqrt(lambda - lambda_bp)}
// sampled on the spatial grid; SVD of that matrix.
std::vector<DegeneracyPoint> degeneracy_diagnostics(const ModelParams& p, const std::vector<cplx>& lambdas,
                                                    const std::vector<double>& alpha,
                                                    const std::vector<double>& spatial_grid);

struct LimitExchange {
    std::vector<cplx> lambdas;
    std::vector<cplx> interior_entries;  // int psi^R(lambda) phi_bin(lambda) dx
    // int psi(k_bp, lambda_bp) phi_bin(lambda_bp) dx. At lambda_bp the continuum pole sits on the
    // bin; the bin is its principal value, the mean of the two one-sided limits.
    cplx limit_entry;
    cplx limit_side_a;
    cplx limit_side_b;
};

// Bin on the rotated ray [q_bp - width/2, q_bp + width/2] containing k_bp.
LimitExchange limit_exchange(const ModelParams& p, const std::vector<cplx>& lambdas, double width,
                             const std::vector<double>& spatial_grid);

}  // namespace csm
