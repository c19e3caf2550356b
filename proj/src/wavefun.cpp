#include "csm/wavefun.hpp"

#include <algorithm>
#include <cmath>

#include "csm/errors.hpp"
#include "csm/quadrature.hpp"

namespace csm {
namespace {

const cplx I(0.0, 1.0);
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kTailDrop = 1e-13;

}  // namespace

std::vector<TailTerm> tail_terms(const ModelParams& p, cplx k, bool plus) {
    const cplx a = std::exp(kappa_of_k(p, k) * kLn2);
    const cplx mu = I * k * std::exp(I * p.theta);
    if (plus) return {{a, mu}};
    const auto c = asymptotic_coefficients(p, k);
    std::vector<TailTerm> out;
    const double scale = std::max(std::abs(c.refl), std::abs(c.trans_like));
    if (std::abs(c.refl) > kTailDrop * scale) out.push_back({a * c.refl, mu});
    if (std::abs(c.trans_like) > kTailDrop * scale) out.push_back({a * c.trans_like, -mu});
    return out;
}

namespace {

cplx dominant(const std::vector<TailTerm>& terms) {
    cplx best = terms.front().mu;
    for (const auto& t : terms)
        if (t.mu.real() > best.real()) best = t.mu;
    return best;
}

// int_X^inf (sum_j c_j e^{mu_j y})^2 dy in closed form.
cplx tail_square_integral(const std::vector<TailTerm>& terms, double xmax, bool abel) {
    cplx sum = 0.0;
    for (const auto& ti : terms) {
        for (const auto& tj : terms) {
            const cplx nu = ti.mu + tj.mu;
            const bool oscillating = abel && std::abs(nu.real()) <= 1e-12 * std::abs(nu) && std::abs(nu) > 1e-12;
            if (!(nu.real() < 0.0) && !oscillating)
                throw NonNormalizable("tail term exp((" + std::to_string(nu.real()) + ") |x|) does not decay");
            sum += -ti.coef * tj.coef * std::exp(nu * xmax) / nu;
        }
    }
    return sum;
}

}  // namespace

std::vector<double> default_grid(const ModelParams& p, double beta_xmax, int points) {
    if (points < 3 || points % 2 == 0) throw DomainError("grid needs an odd number (>= 3) of points");
    const double xmax = beta_xmax / p.beta;
    std::vector<double> x(points);
    for (int i = 0; i < points; ++i) x[i] = -xmax + 2.0 * xmax * i / (points - 1);
    x[points / 2] = 0.0;
    return x;
}

cplx psi_at(const ModelParams& p, cplx k, double x) {
    const cplx kappa = kappa_of_k(p, k);
    const cplx s = derive(p).s;
    const cplx w = p.beta * x * std::exp(I * p.theta);

    // t = e^{-2|w|} side by side so neither cosh nor u overflows.
    cplx log_cosh, u, log1mu;
    if (w.real() >= 0.0) {
        const cplx t = std::exp(-2.0 * w);
        if (t == -1.0) throw SingularCoordinate("cosh(beta x') = 0");
        const cplx l1p = log1p(t);
        log_cosh = w + l1p - kLn2;
        u = t / (1.0 + t);
        log1mu = -l1p;
    } else {
        const cplx t = std::exp(2.0 * w);
        if (t == -1.0) throw SingularCoordinate("cosh(beta x') = 0");
        const cplx l1p = log1p(t);
        log_cosh = -w + l1p - kLn2;
        u = 1.0 / (1.0 + t);
        log1mu = 2.0 * w - l1p;
    }
    const cplx f = hyp2f1({kappa - s, kappa + s + 1.0, kappa + 1.0, u}, log1mu);
    return std::exp(-kappa * log_cosh) * f;
}

WaveField eval_wavefunction(const ModelParams& p, cplx k, const std::vector<double>& grid) {
    p.validate(true);
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
    WaveField f;
    f.grid = grid;
    f.params = p;
    f.k = k;
    f.values.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { f.values[i] = psi_at(p, k, grid[i]); });
    f.tail_plus = dominant(tail_terms(p, k, true));
    f.tail_minus = dominant(tail_terms(p, k, false));
    return f;
}

WaveField eval_wavefunction(const ModelParams& p, cplx k) {
    return eval_wavefunction(p, k, default_grid(p));
}

AsymptoticCoefficients asymptotic_coefficients(const ModelParams& p, cplx k) {
    const cplx kappa = kappa_of_k(p, k);
    const cplx s = derive(p).s;
    const cplx g1k = complex_gamma(1.0 + kappa);
    AsymptoticCoefficients c;
    c.refl = g1k * complex_gamma(-kappa) * rgamma(1.0 + s) * rgamma(-s);
    c.trans_like = g1k * complex_gamma(kappa) * rgamma(kappa - s) * rgamma(kappa + s + 1.0);
    return c;
}

cplx refl_sinh_form(const ModelParams& p, cplx k) {
    const cplx s = derive(p).s;
    return I * std::sin(kPi * s) / std::sinh(kPi * k / p.beta);
}

cplx psi_asymptotic(const ModelParams& p, cplx k, double x) {
    cplx sum = 0.0;
    for (const auto& t : tail_terms(p, k, x >= 0.0)) sum += t.coef * std::exp(t.mu * std::abs(x));
    return sum;
}

cplx siegert_residual(const ModelParams& p, cplx k) { return asymptotic_coefficients(p, k).trans_like; }

cplx anti_siegert_residual(const ModelParams& p, cplx k) { return siegert_residual(p, -k); }

SiegertRoot siegert_root(const ModelParams& p, cplx guess, bool anti) {
    constexpr double h = 1e-7;
    constexpr int max_iter = 100;
    auto f = [&](cplx k) { return anti ? anti_siegert_residual(p, k) : siegert_residual(p, k); };
    cplx k = guess;
    for (int it = 1; it <= max_iter; ++it) {
        const cplx fk = f(k);
        const cplx df = (f(k + h) - f(k - h)) / (2.0 * h);
        if (df == 0.0) throw NonConvergence("Siegert Newton: zero derivative", it, std::abs(fk));
        const cplx dk = fk / df;
        k -= dk;
        if (std::abs(dk) < 1e-12) return {k, p.hbar * p.hbar * k * k / (2.0 * p.m), it};
    }
    throw NonConvergence("Siegert Newton", max_iter, std::abs(f(k)));
}

cplx gamow_cnorm(const WaveField& field, bool abel) {
    const auto& x = field.grid;
    const std::size_t n = x.size();
    if (n < 3 || n % 2 == 0) throw DomainError("c-norm needs an odd number of grid points");
    const double h = (x.back() - x.front()) / double(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(x[i] - x[i - 1] - h) > 1e-9 * h) throw DomainError("c-norm needs a uniform grid");
    std::vector<cplx> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = field.values[i] * field.values[i];
    cplx total = simpson(sq, h);
    total += tail_square_integral(tail_terms(field.params, field.k, true), x.back(), abel);
    total += tail_square_integral(tail_terms(field.params, field.k, false), -x.front(), abel);
    return total;
}

const char* to_string(RegionLabel label) {
    switch (label) {
        case RegionLabel::ConvergentA: return "A";
        case RegionLabel::DivergentB: return "B";
        case RegionLabel::ScatteringBoundary: return "boundary";
    }
    return "?";
}

double region_functional(const ModelParams& p, cplx k) { return -(k * std::exp(I * p.theta)).imag(); }

RegionLabel classify_wavenumber(const ModelParams& p, cplx k) {
    const double f = region_functional(p, k);
    if (std::abs(f) < 1e-12) return RegionLabel::ScatteringBoundary;
    return f < 0.0 ? RegionLabel::ConvergentA : RegionLabel::DivergentB;
}

cplx resonance_k0(const ModelParams& p, cplx lambda) {
    const cplx g = with_lambda(p, lambda).coupling();
    return 0.5 * p.beta * (std::sqrt(g - 1.0) - I);
}

RegionLabel classify_region(const ModelParams& p, cplx lambda) {
    return classify_wavenumber(p, resonance_k0(p, lambda));
}

}  // namespace csm
