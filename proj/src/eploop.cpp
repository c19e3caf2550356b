#include "csm/eploop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "csm/binbasis.hpp"
#include "csm/errors.hpp"
#include "csm/quadrature.hpp"

namespace csm {
namespace {

const cplx I(0.0, 1.0);
constexpr double kLn2 = 0.69314718055994530942;
constexpr int kBinOrder = 16;  // bins are tiny near lambda_bp

cplx nearest_root(cplx z, cplx previous) {
    const cplx r = std::sqrt(z);
    return std::abs(r - previous) <= std::abs(-r - previous) ? r : -r;
}

void check_alpha(const std::vector<double>& alpha) {
    if (alpha.size() < 2) throw DomainError("alpha' needs at least two nodes");
    for (std::size_t i = 1; i < alpha.size(); ++i)
        if (!(alpha[i] > alpha[i - 1])) throw DomainError("alpha' must be strictly increasing");
}

TracePoint sheet_point(const ModelParams& p, const RegionBounds& rb, cplx lambda, cplx delta,
                       const std::vector<double>& alpha) {
    TracePoint t;
    t.lambda = lambda;
    t.delta = delta;
    const std::size_t n = alpha.size();
    t.e_plus = bin_energy(p, rb.k_bp + alpha[n - 2] * delta, rb.k_bp + alpha[n - 1] * delta);
    t.e_minus = bin_energy(p, rb.k_bp + alpha[0] * delta, rb.k_bp + alpha[1] * delta);
    t.resonance = resonance_energy(with_lambda(p, lambda), 0).energy;
    return t;
}

double sheet_functional(const ModelParams& p, cplx e_plus) { return region_functional(p, wavenumber(p, e_plus)); }

}  // namespace

std::vector<TracePoint> trace_resonance(const ModelParams& p, const std::vector<cplx>& path,
                                        const std::vector<double>& alpha) {
    check_alpha(alpha);
    const auto rb = lambda_window(p);
    std::vector<TracePoint> out;
    out.reserve(path.size());
    cplx delta;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (std::abs(with_lambda(p, path[i]).coupling() - 1.0) < 1e-12) throw DomainError("path touches g = 1");
        const cplx d = path[i] - rb.lambda_bp;
        if (std::abs(d) == 0.0) throw BranchCollision("path lands on lambda_bp");
        if (i == 0) {
            delta = std::sqrt(d);
        } else {
            const cplx next = nearest_root(d, delta);
            if (std::abs(next - delta) > 0.5 * std::abs(delta))
                throw BranchCollision("step " + std::to_string(i) + " too coarse near lambda_bp");
            delta = next;
        }
        out.push_back(sheet_point(p, rb, path[i], delta, alpha));
    }
    return out;
}

PuiseuxFit fit_puiseux(const ModelParams& p, double r_min, double r_max, int samples,
                       const std::vector<double>& alpha) {
    check_alpha(alpha);
    const auto rb = lambda_window(p);
    if (!(r_min > 1e-8 * rb.lambda_bp && r_max < 1e-2 * rb.lambda_bp && r_min <= r_max))
        throw PreconditionViolation("Puiseux window must lie in (1e-8, 1e-2) lambda_bp");
    if (samples < 3 || !(r_max > r_min * (1.0 + 1e-9)))
        throw IllConditionedFit("Puiseux fit needs >= 3 samples on a non-degenerate window");

    // middle of the region-A arc: lambda - lambda_bp ~ e^{i(pi - 2 theta)}
    const cplx dir = std::exp(I * (kPi - 2.0 * p.theta));
    std::vector<double> lr, le;
    std::vector<cplx> d, y;
    for (int j = 0; j < samples; ++j) {
        const double r = r_min * std::pow(r_max / r_min, double(j) / (samples - 1));
        const cplx delta = std::sqrt(r * dir);
        const auto t = sheet_point(p, rb, rb.lambda_bp + r * dir, delta, alpha);
        d.push_back(delta);
        y.push_back(t.e_plus - rb.energy_bp);
        lr.push_back(std::log(r));
        le.push_back(std::log(std::abs(y.back())));
    }

    PuiseuxFit fit;
    double mx = 0.0, my = 0.0;
    for (int j = 0; j < samples; ++j) mx += lr[j] / samples, my += le[j] / samples;
    double sxy = 0.0, sxx = 0.0;
    for (int j = 0; j < samples; ++j) sxy += (lr[j] - mx) * (le[j] - my), sxx += (lr[j] - mx) * (lr[j] - mx);
    fit.exponent = sxy / sxx;

    // E_+ - E_bp = c + alpha delta + gamma delta^2, the last term standing for O(lambda)
    Eigen::MatrixXcd a(samples, 3);
    Eigen::VectorXcd b(samples);
    for (int j = 0; j < samples; ++j) {
        a(j, 0) = 1.0;
        a(j, 1) = d[j];
        a(j, 2) = d[j] * d[j];
        b(j) = y[j];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    if (qr.rank() < 3) throw IllConditionedFit("Puiseux design matrix is rank deficient");
    const Eigen::VectorXcd c = qr.solve(b);
    fit.intercept = c(0);
    fit.alpha = c(1);
    fit.residual = (a * c - b).norm() / b.norm();
    return fit;
}

// ---- loop ----------------------------------------------------------------------------

namespace {

struct LoopState {
    cplx delta;  // sqrt(lambda - lambda_bp)
    cplx root;   // sqrt(delta)
};

// Sum over the EP bins of (1 / sqrt dk_n) int_{k_n}^{k_{n+1}} f(k) dk, sqrt dk_n = sqrt(dalpha_n) root.
cplx binned_sum(const std::function<cplx(cplx)>& f, cplx k_bp, const std::vector<double>& alpha, const LoopState& s) {
    cplx sum = 0.0;
    for (std::size_t n = 0; n + 1 < alpha.size(); ++n) {
        const cplx ka = k_bp + alpha[n] * s.delta, kb = k_bp + alpha[n + 1] * s.delta;
        sum += integrate_segment(f, ka, kb, kBinOrder) / (std::sqrt(alpha[n + 1] - alpha[n]) * s.root);
    }
    return sum;
}

struct Setup {
    RegionBounds rb;
    double phi0 = 0.0;
    double sgn = 1.0;
    int total = 0;
    LoopState start;
};

Setup loop_setup(const ModelParams& p, const LoopSpec& spec) {
    check_alpha(spec.alpha);
    if (!(spec.radius > 0.0)) throw DomainError("loop radius must be positive");
    if (spec.n_steps < 64) throw DomainError("loop needs n_steps >= 64 per 2 pi");
    if (spec.windings == 0) throw DomainError("loop needs a non-zero winding number");
    if (spec.readout_points < 3 || spec.readout_points % 2 == 0) throw DomainError("readout grid needs an odd count");
    Setup s;
    s.rb = lambda_window(p);
    s.phi0 = std::isnan(spec.start_phase) ? 2.0 * kPi - 2.0 * p.theta : spec.start_phase;
    s.sgn = spec.windings > 0 ? 1.0 : -1.0;
    s.total = spec.n_steps * std::abs(spec.windings);
    s.start.delta = std::sqrt(spec.radius * std::exp(I * s.phi0)) * (spec.resonance_on_plus ? 1.0 : -1.0);
    s.start.root = std::sqrt(s.start.delta);

    double dmax = 0.0;
    for (std::size_t i = 1; i < spec.alpha.size(); ++i) dmax = std::max(dmax, spec.alpha[i] - spec.alpha[i - 1]);
    const cplx xp = spec.x_ref / p.beta * std::exp(I * p.theta);
    const double taylor = std::abs(-I * 2.0 * kLn2 / (2.0 * p.beta) + I * xp) * dmax * std::sqrt(spec.radius);
    if (!(taylor < 0.1))
        throw PreconditionViolation("Taylor bound violated: " + std::to_string(taylor) + " >= 0.1");

    const auto t = sheet_point(p, s.rb, s.rb.lambda_bp + spec.radius * std::exp(I * s.phi0), s.start.delta, spec.alpha);
    const double f = sheet_functional(p, t.e_plus);
    if (std::abs(f) > 1e-8 * std::abs(wavenumber(p, t.e_plus) - s.rb.k_bp))
        throw PreconditionViolation("loop start is not on the A/B boundary");
    return s;
}

LoopState step_state(const LoopState& prev, cplx d) {
    LoopState s;
    s.delta = nearest_root(d, prev.delta);
    s.root = nearest_root(s.delta, prev.root);
    return s;
}

}  // namespace

LoopTrace run_berry_loop(const ModelParams& p, const LoopSpec& spec) {
    const Setup su = loop_setup(p, spec);
    const auto lambda_at = [&](double phi) { return su.rb.lambda_bp + spec.radius * std::exp(I * (su.phi0 + phi)); };
    const auto fval = [&](const LoopState& s) {
        return sheet_functional(p, sheet_point(p, su.rb, 0.0, s.delta, spec.alpha).e_plus);
    };

    const std::vector<double> grid = default_grid(p, spec.x_ref, spec.readout_points);
    const double h = grid[1] - grid[0];
    const auto state_on_grid = [&](const ModelParams& q, const LoopState& s) {
        std::vector<cplx> v(grid.size());
        parallel_for(grid.size(), [&](std::size_t i) {
            v[i] = binned_sum([&](cplx k) { return psi_at(q, k, grid[i]); }, su.rb.k_bp, spec.alpha, s);
        });
        return v;
    };
    const auto overlap = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        std::vector<cplx> prod(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) prod[i] = std::conj(a[i]) * b[i];
        return simpson(prod, h);
    };

    LoopTrace tr;
    LoopState st = su.start;
    std::vector<cplx> psi0;
    cplx connection = 1.0;
    double last_f = 0.0, last_phi = 0.0, prev_phase = 0.0, phase0 = 0.0;
    LoopState last_state = st;
    bool landed = false;

    for (int j = 0; j <= su.total; ++j) {
        const double phi = su.sgn * 2.0 * kPi * double(j) / spec.n_steps;
        const cplx lambda = lambda_at(phi);
        if (j > 0) st = step_state(st, lambda - su.rb.lambda_bp);
        const ModelParams q = with_lambda(p, lambda);
        const auto t = sheet_point(p, su.rb, lambda, st.delta, spec.alpha);
        const double f = sheet_functional(p, t.e_plus);
        const RegionLabel label = classify_wavenumber(p, wavenumber(p, t.e_plus));

        if (label != RegionLabel::ScatteringBoundary) {
            if (landed) {
                // touched the boundary without crossing it: take the factor back
                if ((f > 0.0) == (last_f > 0.0)) {
                    tr.crossings.pop_back();
                    connection /= su.sgn * I;
                }
                landed = false;
            } else if (last_f != 0.0 && (f > 0.0) != (last_f > 0.0)) {
                // bisect the sign change of the sheet functional in phi
                double a = last_phi, b = phi;
                LoopState sa = last_state;
                while (std::abs(b - a) > 1e-10) {
                    const double m = 0.5 * (a + b);
                    const LoopState sm = step_state(sa, lambda_at(m) - su.rb.lambda_bp);
                    if ((fval(sm) > 0.0) == (last_f > 0.0)) a = m, sa = sm;
                    else b = m;
                }
                tr.crossings.push_back(0.5 * (a + b));
                connection *= su.sgn * I;
            }
            last_f = f;
            last_phi = phi;
            last_state = st;
        } else if (last_f != 0.0 && !landed) {
            // step lands on the boundary: the factor applies here
            tr.crossings.push_back(phi);
            connection *= su.sgn * I;
            landed = true;
        }

        const auto psi = state_on_grid(q, st);
        const cplx ref = psi.back();
        double phase = std::arg(ref);
        if (j == 0) {
            psi0 = psi;
            phase0 = phase;
        } else {
            double jump = std::remainder(phase - prev_phase, 2.0 * kPi);
            if (std::abs(jump) > kPi / 4.0)
                throw StepTooCoarse("readout phase jumps by " + std::to_string(jump) + " at phi = " + std::to_string(phi));
            phase = prev_phase + jump;
        }
        prev_phase = phase;
        tr.max_phase_deviation = std::max(tr.max_phase_deviation, std::abs(phase - phase0 - phi / 4.0));

        LoopRecord rec;
        rec.phi = phi;
        rec.lambda = lambda;
        rec.e_plus = t.e_plus;
        rec.e_minus = t.e_minus;
        rec.region = label;
        rec.connection = connection;
        rec.overall = ref / psi0.back();
        rec.unwrapped_phase = phase;
        tr.records.push_back(rec);

        if (j > 0 && j % spec.n_steps == 0) {
            const cplx o = overlap(psi0, psi) / overlap(psi0, psi0);
            tr.winding_overlap.push_back(o);
            if (tr.monodromy_order == 0 && std::abs(o - 1.0) < 1e-3) tr.monodromy_order = j / spec.n_steps;
        }
    }
    return tr;
}

AsymptoticPhase case_asymptotic_phase(const ModelParams& p, const LoopSpec& spec, bool plus) {
    const Setup su = loop_setup(p, spec);
    const cplx xp = (plus ? 1.0 : -1.0) * spec.x_ref / p.beta * std::exp(I * p.theta);
    AsymptoticPhase out;
    LoopState st = su.start;
    const ModelParams at_bp = with_lambda(p, su.rb.lambda_bp);
    const cplx lead = std::exp(kappa_of_k(p, su.rb.k_bp) * kLn2) * std::exp((plus ? I : -I) * su.rb.k_bp * xp) *
                      (plus ? cplx(1.0) : asymptotic_coefficients(at_bp, su.rb.k_bp).refl);
    for (int j = 0; j <= su.total; ++j) {
        const double phi = su.sgn * 2.0 * kPi * double(j) / spec.n_steps;
        const cplx lambda = su.rb.lambda_bp + spec.radius * std::exp(I * (su.phi0 + phi));
        if (j > 0) st = step_state(st, lambda - su.rb.lambda_bp);
        const ModelParams q = with_lambda(p, lambda);
        const auto amp = [&](cplx k) {
            const cplx four = std::exp(kappa_of_k(q, k) * kLn2);
            if (plus) return four * std::exp(I * k * xp);
            return asymptotic_coefficients(q, k).refl * four * std::exp(-I * k * xp);
        };
        out.phi.push_back(phi);
        out.factor.push_back(binned_sum(amp, su.rb.k_bp, spec.alpha, st) / lead);
        if (j == spec.n_steps) out.ratio_2pi = out.factor.back() / out.factor.front();
    }
    return out;
}

std::string loop_trace_csv(const LoopTrace& trace) {
    std::string out = "phi,re_lambda,im_lambda,re_E_plus,im_E_plus,re_E_minus,im_E_minus,region,re_factor,im_factor,unwrapped_phase\n";
    char buf[512];
    for (const auto& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g\n", r.phi,
                      r.lambda.real(), r.lambda.imag(), r.e_plus.real(), r.e_plus.imag(), r.e_minus.real(),
                      r.e_minus.imag(), to_string(r.region), r.connection.real(), r.connection.imag(),
                      r.unwrapped_phase);
        out += buf;
    }
    return out;
}

}  // namespace csm
