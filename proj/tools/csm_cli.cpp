#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "csm/binbasis.hpp"
#include "csm/config.hpp"
#include "csm/eploop.hpp"
#include "csm/errors.hpp"
#include "csm/output.hpp"

using namespace csm;
using nlohmann::json;

namespace {

const cplx I(0.0, 1.0);

struct Sink {
    std::string dir;
    bool csv = true, js = true;

    void table(const std::string& name, const Table& t, json meta = json::object()) const {
        if (csv) write_file(dir + "/" + name + ".csv", t.csv());
        if (js) {
            meta["rows"] = t.json();
            meta["csv_version"] = kCsvVersion;
            write_file(dir + "/" + name + ".json", dump_json(meta));
        }
    }
    void verdict(const std::string& name, const json& j) const { write_file(dir + "/" + name + ".json", dump_json(j)); }
};

json cjson(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json params_json(const ModelParams& p) {
    return {{"m", p.m}, {"hbar", p.hbar}, {"beta", p.beta}, {"lambda", cjson(p.lambda)}, {"theta", p.theta}};
}

Table matrix_table(const std::string& kind, const OverlapMatrix& m) {
    Table t{kind, {"row", "col", "re", "im"}, {}};
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        for (std::size_t j = 0; j < m.entries[i].size(); ++j)
            t.rows.push_back({m.row_labels[i], m.col_labels[j], fmt17(m.entries[i][j].real()), fmt17(m.entries[i][j].imag())});
    return t;
}

void cmd_spectrum(const RunConfig& c, const Sink& out) {
    Table t{"spectrum", {"n", "re_E", "im_E", "theta_n"}, {}};
    for (int n = 0; n <= c.spectrum.n_max; ++n) {
        const auto r = resonance_energy(c.params, n);
        const auto a = critical_angle(c.params, n);
        t.rows.push_back({std::to_string(n), fmt17(r.energy.real()), fmt17(r.energy.imag()),
                          a.undefined ? "nan" : fmt17(a.quadrant_corrected)});
    }
    out.table("spectrum", t, {{"params", params_json(c.params)}});
}

void cmd_regions(const RunConfig& c, const Sink& out) {
    Table t{"regions", {"theta", "l0m", "l0p", "l1m", "l1p", "lbp"}, {}};
    const auto& r = c.regions;
    for (int i = 0; i < r.points; ++i) {
        const double th = r.theta_min + (r.theta_max - r.theta_min) * i / (r.points - 1);
        const auto b = lambda_window(with_theta(c.params, th));
        t.rows.push_back({fmt17(th), fmt17(b.lambda0_minus), fmt17(b.lambda0_plus), fmt17(b.lambda1_minus),
                          fmt17(b.lambda1_plus), fmt17(b.lambda_bp)});
    }
    out.table("regions", t, {{"params", params_json(c.params)}});
}

void cmd_overlap(const RunConfig& c, const Sink& out) {
    const auto& o = c.overlap;
    ModelParams p = c.params;
    ContourSpec spec = RotatedRay{o.kmin, o.kmax};
    if (o.hermitian) {
        p.theta = 0.0;
        spec = RealAxis{o.kmin, o.kmax};
    }
    const auto grid = default_grid(p, o.grid.beta_xmax, o.grid.points);
    const auto bins = build_bins(p, spec, o.n_bins);
    std::vector<BinnedState> states;
    for (std::size_t n = 0; n < bins.size(); ++n) states.push_back(binned_state(p, bins, n, grid));
    const auto S = overlap_matrix(p, states, grid);
    const auto H = hamiltonian_matrix(p, states, grid);
    json meta = {{"params", params_json(p)}};
    out.table("overlap_S", matrix_table("overlap_S", S), meta);
    out.table("overlap_H", matrix_table("overlap_H", H), meta);

    Table e{"bin_energies", {"n", "re_ka", "im_ka", "re_kb", "im_kb", "re_eps", "im_eps"}, {}};
    for (const auto& s : states)
        e.rows.push_back({std::to_string(s.index), fmt17(s.ka.real()), fmt17(s.ka.imag()), fmt17(s.kb.real()),
                          fmt17(s.kb.imag()), fmt17(s.energy.real()), fmt17(s.energy.imag())});
    out.table("bin_energies", e, meta);

    if (o.eps.empty()) return;
    ModelParams q = c.params;
    const double lbp = lambda_window(q).lambda_bp;
    q.lambda = lbp;
    const cplx u = region_a_direction(q);
    std::vector<cplx> lams;
    for (double eps : o.eps) lams.push_back(lbp + eps * u);
    const auto qgrid = default_grid(q, o.grid.beta_xmax, o.grid.points);
    const auto d = degeneracy_diagnostics(q, lams, o.alpha, qgrid);
    Table t{"degeneracy", {"eps", "re_lambda", "im_lambda", "sigma_min", "condition"}, {}};
    for (std::size_t i = 0; i < d.size(); ++i)
        t.rows.push_back({fmt17(o.eps[i]), fmt17(d[i].lambda.real()), fmt17(d[i].lambda.imag()), fmt17(d[i].sigma_min),
                          fmt17(d[i].condition)});
    const auto le = limit_exchange(q, lams, o.limit_width, qgrid);
    json lj = json::array();
    for (std::size_t i = 0; i < lams.size(); ++i)
        lj.push_back({{"eps", o.eps[i]}, {"entry", cjson(le.interior_entries[i])}, {"abs", std::abs(le.interior_entries[i])}});
    json dmeta = {{"params", params_json(q)},
                  {"region_a_direction", cjson(u)},
                  {"limit_exchange",
                   {{"interior", lj},
                    {"limit_entry", cjson(le.limit_entry)},
                    {"limit_abs", std::abs(le.limit_entry)},
                    {"limit_side_a", cjson(le.limit_side_a)},
                    {"limit_side_b", cjson(le.limit_side_b)}}}};
    out.table("degeneracy", t, dmeta);
}

void cmd_berry(const RunConfig& c, const Sink& out) {
    const auto& b = c.berry;
    ModelParams p = c.params;
    const double lbp = lambda_window(p).lambda_bp;
    p.lambda = lbp;
    const auto fit = fit_puiseux(p, b.fit_min_rel * lbp, b.fit_max_rel * lbp, b.fit_samples, b.alpha);
    LoopSpec s;
    s.radius = b.radius_rel * lbp;
    s.n_steps = b.n_steps;
    s.windings = b.windings;
    s.resonance_on_plus = b.resonance_on_plus;
    s.alpha = b.alpha;
    const auto tr = run_berry_loop(p, s);
    if (out.csv) write_file(out.dir + "/loop_trace.csv", std::string("# ") + kCsvVersion + " loop_trace\n" + loop_trace_csv(tr));

    auto overlap_at = [&](std::size_t w) -> json {
        return w <= tr.winding_overlap.size() ? cjson(tr.winding_overlap[w - 1]) : json(nullptr);
    };
    const auto plus = case_asymptotic_phase(p, s, true);
    const auto minus = case_asymptotic_phase(p, s, false);
    json v = {{"params", params_json(p)},
              {"exponent", fit.exponent},
              {"alpha", cjson(fit.alpha)},
              {"fit_intercept", cjson(fit.intercept)},
              {"fit_residual", fit.residual},
              {"overlap_2pi", overlap_at(1)},
              {"overlap_4pi", overlap_at(2)},
              {"overlap_8pi", overlap_at(4)},
              {"monodromy_order", tr.monodromy_order},
              {"crossings", tr.crossings},
              {"max_phase_deviation", tr.max_phase_deviation},
              {"factor_2pi_plus", cjson(plus.ratio_2pi)},
              {"factor_2pi_minus", cjson(minus.ratio_2pi)}};
    out.verdict("berry", v);
}

// -(hbar^2/2m) e^{-2i theta} psi'' + lambda / cosh^2(beta x e^{i theta}) psi - E psi, 4th-order differences
double ode_residual(const ModelParams& p, cplx k, const std::vector<double>& x, const std::vector<cplx>& psi) {
    const double h = x[1] - x[0];
    const cplx e = p.hbar * p.hbar * k * k / (2.0 * p.m);
    const cplx kin = -p.hbar * p.hbar / (2.0 * p.m) * std::exp(-2.0 * I * p.theta);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 2; i + 2 < x.size(); ++i) {
        const cplx d2 = (-psi[i - 2] + 16.0 * psi[i - 1] - 30.0 * psi[i] + 16.0 * psi[i + 1] - psi[i + 2]) / (12.0 * h * h);
        const cplx c = std::cosh(p.beta * x[i] * std::exp(I * p.theta));
        worst = std::max(worst, std::abs(kin * d2 + p.lambda / (c * c) * psi[i] - e * psi[i]));
        scale = std::max(scale, std::abs(e * psi[i]));
    }
    return worst / scale;
}

void cmd_wavefunction(const RunConfig& c, const Sink& out) {
    const auto& w = c.wavefunction;
    const cplx k = w.resonance ? resonance_energy(c.params, w.n).k : w.k;
    const auto grid = default_grid(c.params, w.grid.beta_xmax, w.grid.points);
    const auto f = eval_wavefunction(c.params, k, grid);
    Table t{"wavefunction", {"x", "re_psi", "im_psi"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.rows.push_back({fmt17(grid[i]), fmt17(f.values[i].real()), fmt17(f.values[i].imag())});
    out.table("wavefunction", t,
              {{"params", params_json(c.params)},
               {"k", cjson(k)},
               {"region", to_string(classify_wavenumber(c.params, k))},
               {"tail_plus", cjson(f.tail_plus)},
               {"tail_minus", cjson(f.tail_minus)},
               {"ode_residual", ode_residual(c.params, k, grid, f.values)}});
}

int fail(int code, const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Complex-scaled inverted Rosen-Morse barrier: resonances, bins and branch-point loops"};
    std::string config_path, out_dir = ".", format = "both";
    app.add_option("--config", config_path, "JSON run configuration (defaults apply without one)");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    app.require_subcommand(1, 1);
    app.fallthrough();
    for (const char* name : {"spectrum", "regions", "overlap", "berry", "wavefunction"}) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fail(2, "ConfigError", e.what());
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        const RunConfig c = config_path.empty() ? parse_config("{}") : load_config(config_path);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
        const Sink out{out_dir, format != "json", format != "csv"};
        if (cmd == "spectrum") cmd_spectrum(c, out);
        else if (cmd == "regions") cmd_regions(c, out);
        else if (cmd == "overlap") cmd_overlap(c, out);
        else if (cmd == "berry") cmd_berry(c, out);
        else cmd_wavefunction(c, out);
    } catch (const ConfigError& e) {
        return fail(2, e.kind(), e.what());
    } catch (const Error& e) {
        return fail(3, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(3, "InternalError", e.what());
    }
    return 0;
}
