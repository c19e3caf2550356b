#include "csm/binbasis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "csm/errors.hpp"
#include "csm/quadrature.hpp"

namespace csm {
namespace {

const cplx I(0.0, 1.0);
constexpr double kLn2 = 0.69314718055994530942;
constexpr int kExpansionOrder = 4;     // integration-by-parts terms beyond L
constexpr double kFarZone = 400.0;     // L = X + 400 / beta

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

// ---- bins ----------------------------------------------------------------------------

BinGrid build_bins(const ModelParams& p, const ContourSpec& spec, int n_bins) {
    BinGrid g;
    if (const auto* r = std::get_if<RealAxis>(&spec)) {
        if (n_bins <= 0) throw EmptyRange("no bins requested");
        if (!(r->kmax > r->kmin)) throw EmptyRange("kmax <= kmin");
        for (int i = 0; i <= n_bins; ++i) g.nodes.push_back(r->kmin + (r->kmax - r->kmin) * i / n_bins);
    } else if (const auto* q = std::get_if<RotatedRay>(&spec)) {
        if (n_bins <= 0) throw EmptyRange("no bins requested");
        if (!(q->qmax > q->qmin)) throw EmptyRange("qmax <= qmin");
        const cplx dir = std::exp(-I * p.theta);
        for (int i = 0; i <= n_bins; ++i) g.nodes.push_back(dir * (q->qmin + (q->qmax - q->qmin) * i / n_bins));
    } else {
        const auto& e = std::get<EpRay>(spec);
        if (e.alpha.size() < 2) throw EmptyRange("EP ray needs at least two alpha values");
        for (std::size_t i = 1; i < e.alpha.size(); ++i)
            if (!(e.alpha[i] > e.alpha[i - 1])) throw DomainError("alpha values must increase");
        const auto rb = lambda_window(p);
        const cplx root = std::sqrt(e.lambda - rb.lambda_bp);
        for (double a : e.alpha) g.nodes.push_back(rb.k_bp + a * root);
    }
    return g;
}

cplx bin_energy(const ModelParams& p, cplx ka, cplx kb) {
    return p.hbar * p.hbar / (2.0 * p.m) * (ka * ka + ka * kb + kb * kb) / 3.0;
}

// ---- paths ---------------------------------------------------------------------------

KPath make_path(cplx ka, cplx kb, const std::vector<PoleAvoid>& poles, int order, int max_phase_panels) {
    const double len = std::abs(kb - ka);
    if (len == 0.0) throw EmptyRange("zero-length bin");
    const cplx dir = (kb - ka) / len;

    struct Local {
        double t, d, side;
    };
    std::vector<Local> near;
    for (const auto& pole : poles) {
        const cplx z = (pole.location - ka) / dir;
        const double out = std::max({0.0, -z.real(), z.real() - len});
        if (std::hypot(out, z.imag()) > len) continue;
        double side = std::abs(z.imag()) > 1e-13 * len ? sign_of(z.imag()) : sign_of((pole.side / dir).imag());
        near.push_back({z.real(), z.imag(), side});
    }

    // one detour at most
    bool bulge = false;
    double tc = 0.0, r = 0.0, bulge_dir = 0.0;
    for (const auto& q : near) {
        if (q.t <= 0.0 || q.t >= len) continue;
        const double rp = std::min(0.5 * std::min(q.t, len - q.t), 0.25 * len);
        if (std::abs(q.d) < 0.5 * rp) {
            bulge = true;
            tc = q.t;
            r = rp;
            bulge_dir = -q.side;
            break;
        }
    }
    if (bulge) {
        for (const auto& q : near) {
            if (std::hypot(q.t - tc, q.d) < 1.5 * r && q.side == bulge_dir)
                throw QuadratureError("path pinched between poles on opposite sides");
        }
    }

    // breakpoints along t
    std::vector<double> cuts = {0.0, len};
    auto grade = [&](double f, double scale) {
        scale = std::max(scale, 1e-9 * len);
        for (double step = scale; step < len; step *= 2.0) {
            if (f - step > 0.0) cuts.push_back(f - step);
            if (f + step < len) cuts.push_back(f + step);
        }
    };
    if (bulge) {
        cuts.push_back(tc - r);
        cuts.push_back(tc + r);
        grade(tc - r, r);
        grade(tc + r, r);
    }
    for (const auto& q : near) {
        const double f = std::clamp(q.t, 0.0, len);
        if (bulge && std::abs(f - tc) < r) continue;
        grade(f, std::hypot(q.t - f, q.d));
    }
    const int uniform = std::max(1, max_phase_panels);
    for (int i = 1; i < uniform; ++i) cuts.push_back(len * i / uniform);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pts;
    for (double c : cuts) {
        if (bulge && c > tc - r + 1e-15 * len && c < tc + r - 1e-15 * len) continue;
        if (pts.empty() || c - pts.back() > 1e-12 * len) pts.push_back(c);
    }
    if (pts.back() < len) pts.back() = len;

    const auto& gl = gauss_legendre(order);
    const auto& gl_arc = gauss_legendre(2 * order);
    KPath path;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (bulge && std::abs(a - (tc - r)) < 1e-12 * len && std::abs(b - (tc + r)) < 1e-12 * len) {
            // semicircle k_c + r dir e^{i phi}, phi: pi -> 0 (left) or pi -> 2 pi (right)
            const cplx kc = ka + dir * tc;
            const double phi0 = kPi, phi1 = bulge_dir > 0 ? 0.0 : 2.0 * kPi;
            const double mid = 0.5 * (phi0 + phi1), half = 0.5 * (phi1 - phi0);
            for (std::size_t j = 0; j < gl_arc.nodes.size(); ++j) {
                const double phi = mid + half * gl_arc.nodes[j];
                const cplx e = std::exp(I * phi);
                path.nodes.push_back(kc + r * dir * e);
                path.weights.push_back(gl_arc.weights[j] * half * I * r * dir * e);
            }
            continue;
        }
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            path.nodes.push_back(ka + dir * (mid + half * gl.nodes[j]));
            path.weights.push_back(dir * half * gl.weights[j]);
        }
    }
    return path;
}

// ---- continuum -----------------------------------------------------------------------

cplx continuum_amplitude(const ModelParams& p, cplx k) {
    return std::exp(0.5 * I * p.theta) / (siegert_residual(p, k) * std::sqrt(2.0 * kPi));
}

cplx continuum_phi(const ModelParams& p, cplx k, double x) {
    return continuum_amplitude(p, k) * std::exp(-kappa_of_k(p, k) * kLn2) * psi_at(p, k, x);
}

// ---- states --------------------------------------------------------------------------

namespace {

// Region-A side of the rotated ray at k: Im(k e^{i theta}) grows along i e^{-i theta}.
cplx region_a_side(const ModelParams& p) { return I * std::exp(-I * p.theta); }

std::vector<PoleAvoid> continuum_poles(const ModelParams& p, double sigma, bool side_a) {
    if (std::abs(p.coupling() - 1.0) < 1e-12) return {};
    const cplx kr = resonance_k0(p, p.lambda);
    const cplx side = side_a ? region_a_side(p) : -region_a_side(p);
    // the partner integrand c(-k) has its pole at -k_R
    return {{sigma * kr, sigma * side}};
}

// Continuous tails of (1/sqrt dk) int extra(k) phi(sigma k) dk.
void add_continuum_tails(const ModelParams& p, StateVector& st, cplx ka, cplx kb, double sigma,
                         const std::function<cplx(cplx)>& extra, const std::vector<PoleAvoid>& poles) {
    const cplx rs = 1.0 / std::sqrt(kb - ka);
    const cplx g = I * sigma * std::exp(I * p.theta);
    // +inf: c e^{ikx'}; -inf: c T e^{ikx'} + c refl e^{-ikx'}, c = e^{i theta/2} / (T sqrt(2 pi))
    auto c = [p, sigma, rs, extra](cplx k) { return rs * extra(k) * continuum_amplitude(p, sigma * k); };
    const cplx incident = rs * std::exp(0.5 * I * p.theta) / std::sqrt(2.0 * kPi);
    auto ct = [incident, extra](cplx k) { return incident * extra(k); };
    auto cr = [p, sigma, rs, extra](cplx k) {
        return rs * extra(k) * continuum_amplitude(p, sigma * k) * asymptotic_coefficients(p, sigma * k).refl;
    };
    st.cont_plus.push_back({ka, kb, g, c, poles});
    st.cont_minus.push_back({ka, kb, -g, ct, {}});
    if (std::abs(p.lambda) > 0.0) st.cont_minus.push_back({ka, kb, g, cr, poles});
}

}  // namespace

BinnedState binned_state(const ModelParams& p, const BinGrid& grid, std::size_t n,
                         const std::vector<double>& spatial_grid, const BinOptions& opt) {
    if (n >= grid.size()) throw DomainError("bin index out of range");
    p.validate(true);
    BinnedState b;
    b.index = n;
    b.ka = grid.nodes[n];
    b.kb = grid.nodes[n + 1];
    b.energy = bin_energy(p, b.ka, b.kb);
    const cplx rs = 1.0 / std::sqrt(b.kb - b.ka);
    const double e_scale = p.hbar * p.hbar / (2.0 * p.m);
    const auto poles_r = continuum_poles(p, 1.0, opt.pole_side_region_a);
    const auto poles_l = continuum_poles(p, -1.0, opt.pole_side_region_a);

    const std::size_t nx = spatial_grid.size();
    auto evaluate = [&](int order, std::vector<cplx>& vr, std::vector<cplx>& vh, std::vector<cplx>& vl) {
        const KPath pr = make_path(b.ka, b.kb, poles_r, order);
        const KPath pl = make_path(b.ka, b.kb, poles_l, order);
        std::vector<cplx> cr(pr.nodes.size()), cl(pl.nodes.size()), er(pr.nodes.size());
        for (std::size_t j = 0; j < pr.nodes.size(); ++j) {
            const cplx k = pr.nodes[j];
            cr[j] = pr.weights[j] * rs * continuum_amplitude(p, k) * std::exp(-kappa_of_k(p, k) * kLn2);
            er[j] = e_scale * k * k;
        }
        for (std::size_t j = 0; j < pl.nodes.size(); ++j) {
            const cplx k = -pl.nodes[j];
            cl[j] = pl.weights[j] * rs * continuum_amplitude(p, k) * std::exp(-kappa_of_k(p, k) * kLn2);
        }
        vr.assign(nx, 0.0);
        vh.assign(nx, 0.0);
        vl.assign(nx, 0.0);
        parallel_for(nx, [&](std::size_t i) {
            const double x = spatial_grid[i];
            cplx sr = 0.0, sh = 0.0, sl = 0.0;
            for (std::size_t j = 0; j < pr.nodes.size(); ++j) {
                const cplx v = cr[j] * psi_at(p, pr.nodes[j], x);
                sr += v;
                sh += er[j] * v;
            }
            for (std::size_t j = 0; j < pl.nodes.size(); ++j) sl += cl[j] * psi_at(p, -pl.nodes[j], x);
            vr[i] = sr;
            vh[i] = sh;
            vl[i] = sl;
        });
    };

    static const int orders[] = {8, 12, 16, 24, 32, 48, 64, 96};
    std::vector<cplx> r0, h0, l0, r1, h1, l1;
    bool done = false;
    for (std::size_t oi = 0; oi < std::size(orders) && orders[oi] <= opt.max_order; ++oi) {
        evaluate(orders[oi], r1, h1, l1);
        if (oi > 0) {
            double diff = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < nx; ++i) {
                diff = std::max({diff, std::abs(r1[i] - r0[i]), std::abs(l1[i] - l0[i]),
                                 std::abs(h1[i] - h0[i]) / std::max(1.0, std::abs(b.energy))});
                scale = std::max({scale, std::abs(r1[i]), std::abs(l1[i])});
            }
            if (diff < opt.tolerance * scale) {
                done = true;
                break;
            }
        }
        std::swap(r0, r1);
        std::swap(h0, h1);
        std::swap(l0, l1);
    }
    if (!done) throw QuadratureError("bin " + std::to_string(n) + ": k-quadrature did not converge");

    const std::string tag = std::to_string(n);
    b.right = {"bin" + tag, std::move(r1), {}, {}, {}, {}};
    b.h_right = {"H bin" + tag, std::move(h1), {}, {}, {}, {}};
    b.partner = {"partner" + tag, std::move(l1), {}, {}, {}, {}};
    auto one = [](cplx) { return cplx(1.0); };
    auto energy = [e_scale](cplx k) { return e_scale * k * k; };
    add_continuum_tails(p, b.right, b.ka, b.kb, 1.0, one, poles_r);
    add_continuum_tails(p, b.h_right, b.ka, b.kb, 1.0, energy, poles_r);
    add_continuum_tails(p, b.partner, b.ka, b.kb, -1.0, one, poles_l);
    return b;
}

StateVector plain_state(const ModelParams& p, cplx k, const std::vector<double>& spatial_grid) {
    const auto f = eval_wavefunction(p, k, spatial_grid);
    StateVector st;
    st.label = "psi";
    st.values = f.values;
    st.discrete_plus = tail_terms(p, k, true);
    st.discrete_minus = tail_terms(p, k, false);
    return st;
}

StateVector resonance_state(const ModelParams& p, const std::vector<double>& spatial_grid, bool abel) {
    const auto r = resonance_energy(p, 0);
    const auto f = eval_wavefunction(p, r.k, spatial_grid);
    const cplx norm = std::sqrt(gamow_cnorm(f, abel));
    StateVector st = plain_state(p, r.k, spatial_grid);
    st.label = "resonance";
    for (auto& v : st.values) v /= norm;
    for (auto& t : st.discrete_plus) t.coef /= norm;
    for (auto& t : st.discrete_minus) t.coef /= norm;
    return st;
}

// ---- overlaps ------------------------------------------------------------------------

namespace {

// int_X^inf e^{nu y} dy (Abel limit when Re nu = 0).
cplx tail_exp_integral(cplx nu, double x) {
    if (std::abs(nu) < 1e-14 || nu.real() > 1e-10 * std::abs(nu))
        throw NonNormalizable("tail product exp(nu |x|) with Re nu >= 0 and nu ~ 0 or growing");
    return -std::exp(nu * x) / nu;
}

// int_X^L e^{nu y} dy
cplx zone_integral(cplx nu, double x, double l) {
    const double w = l - x;
    const cplx z = nu * w;
    if (std::abs(z) < 1e-5) return std::exp(nu * x) * w * (1.0 + z * (0.5 + z / 6.0));
    return std::exp(nu * x) * (std::exp(z) - 1.0) / nu;
}

// j-th derivative at z0 from a Cauchy circle of radius r.
std::vector<cplx> cauchy_derivatives(const std::function<cplx(cplx)>& f, cplx z0, double r, int count) {
    constexpr int n = 32;
    std::vector<cplx> samples(n);
    for (int m = 0; m < n; ++m) samples[m] = f(z0 + r * std::exp(I * (2.0 * kPi * m / n)));
    std::vector<cplx> out(count);
    double fact = 1.0;
    for (int j = 0; j < count; ++j) {
        if (j > 0) fact *= j;
        cplx sum = 0.0;
        for (int m = 0; m < n; ++m) sum += samples[m] * std::exp(-I * (2.0 * kPi * j * m / n));
        out[j] = fact * sum / (double(n) * std::pow(r, j));
    }
    return out;
}

struct EndpointTerm {
    cplx amp;
    cplx rate;  // amp e^{rate y} y^{-power}
    int power;
};

// int_ka^kb w e^{gamma k y} dk = sum over endpoints of sgn (-1)^j w^(j) e^{gamma k y} / (gamma y)^{j+1}
std::vector<EndpointTerm> endpoint_expansion(const ContinuousTail& t) {
    std::vector<EndpointTerm> out;
    const double len = std::abs(t.kb - t.ka);
    for (int e = 0; e < 2; ++e) {
        const cplx ke = e == 0 ? t.ka : t.kb;
        const double sgn = e == 0 ? -1.0 : 1.0;
        double r = std::min(0.25 * len, 0.1);
        for (const auto& pole : t.poles) r = std::min(r, 0.5 * std::abs(pole.location - ke));
        const auto d = cauchy_derivatives(t.weight, ke, r, kExpansionOrder);
        cplx gp = t.gamma;
        for (int j = 0; j < kExpansionOrder; ++j) {
            out.push_back({sgn * (j % 2 ? -1.0 : 1.0) * d[j] / gp, t.gamma * ke, j + 1});
            gp *= t.gamma;
        }
    }
    return out;
}

// int_L^inf e^{nu y} y^{-p} dy = L^{1-p} E_p(-nu L)
cplx far_integral(cplx nu, int power, double l) {
    cplx z = -nu * l;
    if (z.real() < 0.0) {
        if (z.real() < -1e-9 * std::max(1.0, std::abs(z)))
            throw NonNormalizable("growing continuum tail product");
        z = cplx(0.0, z.imag());
    }
    return std::pow(l, 1.0 - power) * expint_e(power, z);
}

int phase_panels(const ContinuousTail& t, double y) {
    return 1 + int(std::abs(t.gamma) * std::abs(t.kb - t.ka) * y / 8.0);
}

cplx disc_cont(const TailTerm& d, const ContinuousTail& t, double x) {
    std::vector<PoleAvoid> poles = t.poles;
    // J(mu + gamma k) has a pole at k = -mu/gamma; Abel: mu -> mu - 0, pole shifts along 1/gamma
    poles.push_back({-d.mu / t.gamma, 1.0 / t.gamma});
    const KPath path = make_path(t.ka, t.kb, poles, 24, phase_panels(t, x));
    cplx sum = 0.0;
    for (std::size_t j = 0; j < path.nodes.size(); ++j) {
        const cplx k = path.nodes[j];
        const cplx nu = d.mu + t.gamma * k;
        sum += path.weights[j] * t.weight(k) * (-std::exp(nu * x) / nu);
    }
    return d.coef * sum;
}

struct Sampled {
    KPath path;
    std::vector<cplx> w;  // path weight * tail weight
};

Sampled sample(const ContinuousTail& t, double l) {
    Sampled s;
    s.path = make_path(t.ka, t.kb, t.poles, 24, phase_panels(t, l));
    s.w.resize(s.path.nodes.size());
    for (std::size_t j = 0; j < s.w.size(); ++j) s.w[j] = s.path.weights[j] * t.weight(s.path.nodes[j]);
    return s;
}

cplx cont_cont(const ContinuousTail& a, const ContinuousTail& b, double x, double l) {
    const Sampled sa = sample(a, l), sb = sample(b, l);
    cplx zone = 0.0;
    for (std::size_t i = 0; i < sa.w.size(); ++i) {
        for (std::size_t j = 0; j < sb.w.size(); ++j) {
            const cplx nu = a.gamma * sa.path.nodes[i] + b.gamma * sb.path.nodes[j];
            zone += sa.w[i] * sb.w[j] * zone_integral(nu, x, l);
        }
    }
    cplx far = 0.0;
    for (const auto& ea : endpoint_expansion(a))
        for (const auto& eb : endpoint_expansion(b))
            far += ea.amp * eb.amp * far_integral(ea.rate + eb.rate, ea.power + eb.power, l);
    return zone + far;
}

cplx side_tails(const std::vector<TailTerm>& dl, const std::vector<ContinuousTail>& cl,
                const std::vector<TailTerm>& dr, const std::vector<ContinuousTail>& cr, double x, double l) {
    cplx sum = 0.0;
    for (const auto& a : dl)
        for (const auto& b : dr) sum += a.coef * b.coef * tail_exp_integral(a.mu + b.mu, x);
    for (const auto& a : dl)
        for (const auto& b : cr) sum += disc_cont(a, b, x);
    for (const auto& a : cl)
        for (const auto& b : dr) sum += disc_cont(b, a, x);
    for (const auto& a : cl)
        for (const auto& b : cr) sum += cont_cont(a, b, x, l);
    return sum;
}

double grid_step(const std::vector<double>& g) {
    const std::size_t n = g.size();
    if (n < 3 || n % 2 == 0) throw DomainError("overlap needs an odd number of grid points");
    const double h = (g.back() - g.front()) / double(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(g[i] - g[i - 1] - h) > 1e-9 * h) throw DomainError("overlap needs a uniform grid");
    return h;
}

}  // namespace

cplx bilinear(const ModelParams& p, const StateVector& left, const StateVector& right,
              const std::vector<double>& spatial_grid) {
    const double h = grid_step(spatial_grid);
    const std::size_t n = spatial_grid.size();
    if (left.values.size() != n || right.values.size() != n) throw DomainError("state/grid size mismatch");
    std::vector<cplx> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = left.values[i] * right.values[i];
    cplx total = simpson(prod, h);
    const double xp = spatial_grid.back(), xm = -spatial_grid.front();
    total += side_tails(left.discrete_plus, left.cont_plus, right.discrete_plus, right.cont_plus, xp,
                        xp + kFarZone / p.beta);
    total += side_tails(left.discrete_minus, left.cont_minus, right.discrete_minus, right.cont_minus, xm,
                        xm + kFarZone / p.beta);
    return total;
}

OverlapMatrix overlap_matrix(const ModelParams& p, const std::vector<StateVector>& left,
                             const std::vector<StateVector>& right, const std::vector<double>& spatial_grid) {
    OverlapMatrix m;
    for (const auto& s : left) m.row_labels.push_back(s.label);
    for (const auto& s : right) m.col_labels.push_back(s.label);
    m.entries.assign(left.size(), std::vector<cplx>(right.size()));
    const std::size_t nc = right.size();
    parallel_for(left.size() * nc, [&](std::size_t idx) {
        m.entries[idx / nc][idx % nc] = bilinear(p, left[idx / nc], right[idx % nc], spatial_grid);
    });
    return m;
}

OverlapMatrix overlap_matrix(const ModelParams& p, const std::vector<BinnedState>& states,
                             const std::vector<double>& spatial_grid) {
    std::vector<StateVector> l, r;
    for (const auto& s : states) {
        l.push_back(s.partner);
        r.push_back(s.right);
    }
    return overlap_matrix(p, l, r, spatial_grid);
}

OverlapMatrix hamiltonian_matrix(const ModelParams& p, const std::vector<BinnedState>& states,
                                 const std::vector<double>& spatial_grid) {
    std::vector<StateVector> l, r;
    for (const auto& s : states) {
        l.push_back(s.partner);
        r.push_back(s.h_right);
    }
    return overlap_matrix(p, l, r, spatial_grid);
}

// ---- EP diagnostics ------------------------------------------------------------------

cplx region_a_direction(const ModelParams& p) {
    const auto rb = lambda_window(p);
    const cplx g = with_lambda(p, rb.lambda_bp).coupling();
    // dk_R/dlambda = beta / (4 sqrt(g - 1)) dg/dlambda
    const cplx dk = p.beta / (4.0 * std::sqrt(g - 1.0)) * (8.0 * p.m / (p.beta * p.beta * p.hbar * p.hbar));
    const cplx v = dk * std::exp(I * p.theta);
    return I * std::conj(v) / std::abs(v);
}

std::vector<DegeneracyPoint> degeneracy_diagnostics(const ModelParams& p, const std::vector<cplx>& lambdas,
                                                    const std::vector<double>& alpha,
                                                    const std::vector<double>& spatial_grid) {
    const double h = grid_step(spatial_grid);
    std::vector<DegeneracyPoint> out;
    for (const cplx lam : lambdas) {
        const ModelParams q = with_lambda(p, lam);
        if (classify_region(q, lam) != RegionLabel::ConvergentA)
            throw PreconditionViolation("degeneracy_diagnostics: lambda outside region A");
        std::vector<StateVector> cols = {resonance_state(q, spatial_grid)};
        std::vector<StateVector> rows = cols;
        const BinGrid bins = build_bins(q, EpRay{lam, alpha}, 0);
        for (std::size_t n = 0; n < bins.size(); ++n) {
            auto b = binned_state(q, bins, n, spatial_grid);
            cols.push_back(std::move(b.right));
            rows.push_back(std::move(b.partner));
        }
        const std::size_t nx = spatial_grid.size();
        Eigen::MatrixXcd m(nx, cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double norm = 0.0;
            for (const auto& v : cols[c].values) norm += std::norm(v);
            norm = std::sqrt(norm * h);
            for (std::size_t i = 0; i < nx; ++i) m(i, c) = cols[c].values[i] * std::sqrt(h) / norm;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        const auto& sv = svd.singularValues();
        DegeneracyPoint d;
        d.lambda = lam;
        for (Eigen::Index i = 0; i < sv.size(); ++i) d.singular_values.push_back(sv(i));
        d.sigma_min = sv(sv.size() - 1);
        d.condition = sv(0) / d.sigma_min;
        try {
            d.bilinear_overlap = overlap_matrix(q, rows, cols, spatial_grid);
        } catch (const NonNormalizable&) {
            // off-ray EP bins can carry growing tails; the bilinear matrix is then not defined
        }
        out.push_back(std::move(d));
    }
    return out;
}

LimitExchange limit_exchange(const ModelParams& p, const std::vector<cplx>& lambdas, double width,
                             const std::vector<double>& spatial_grid) {
    const auto rb = lambda_window(p);
    const double q_bp = std::abs(rb.k_bp);
    if (!(width > 0.0) || width >= 2.0 * q_bp) throw DomainError("limit_exchange: bad bin width");
    LimitExchange out;
    out.lambdas = lambdas;
    for (const cplx lam : lambdas) {
        const ModelParams q = with_lambda(p, lam);
        if (classify_region(q, lam) != RegionLabel::ConvergentA)
            throw PreconditionViolation("limit_exchange: lambda outside region A");
        const BinGrid bins = build_bins(q, RotatedRay{q_bp - 0.5 * width, q_bp + 0.5 * width}, 1);
        const auto b = binned_state(q, bins, 0, spatial_grid);
        out.interior_entries.push_back(bilinear(q, resonance_state(q, spatial_grid), b.right, spatial_grid));
    }
    const ModelParams at_bp = with_lambda(p, rb.lambda_bp);
    const BinGrid bins = build_bins(at_bp, RotatedRay{q_bp - 0.5 * width, q_bp + 0.5 * width}, 1);
    const auto psi_bp = resonance_state(at_bp, spatial_grid, true);
    BinOptions side;
    side.pole_side_region_a = true;
    out.limit_side_a = bilinear(at_bp, psi_bp, binned_state(at_bp, bins, 0, spatial_grid, side).right, spatial_grid);
    side.pole_side_region_a = false;
    out.limit_side_b = bilinear(at_bp, psi_bp, binned_state(at_bp, bins, 0, spatial_grid, side).right, spatial_grid);
    // principal value of the k-integral through the continuum pole
    out.limit_entry = 0.5 * (out.limit_side_a + out.limit_side_b);
    return out;
}

}  // namespace csm
