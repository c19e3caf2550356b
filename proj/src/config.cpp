#include "csm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csm/errors.hpp"

namespace csm {
namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

double number(const json& j, const std::string& key, const std::string& where, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + "." + key + ": must be finite");
    return v;
}

int integer(const json& j, const std::string& key, const std::string& where, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return j[key].get<int>();
}

bool boolean(const json& j, const std::string& key, const std::string& where, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) throw ConfigError(where + "." + key + ": expected true/false");
    return j[key].get<bool>();
}

cplx complex_value(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    only_keys(j, where, {"re", "im"});
    return {number(j, "re", where, 0.0), number(j, "im", where, 0.0)};
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where,
                            std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

GridSpec grid(const json& j, const std::string& where, GridSpec g) {
    only_keys(j, where, {"beta_xmax", "points"});
    g.beta_xmax = number(j, "beta_xmax", where, g.beta_xmax);
    g.points = integer(j, "points", where, g.points);
    if (!(g.beta_xmax > 0.0)) throw ConfigError(where + ".beta_xmax: must be positive");
    if (g.points < 3 || g.points % 2 == 0) throw ConfigError(where + ".points: must be odd and >= 3");
    return g;
}

void increasing(const std::vector<double>& a, const std::string& where) {
    if (a.size() < 2) throw ConfigError(where + ": needs at least two entries");
    for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1])) throw ConfigError(where + ": must be strictly increasing");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    only_keys(j, "config",
              {"units", "lambda", "theta", "spectrum", "regions", "overlap", "berry", "wavefunction", "deterministic"});

    if (j.contains("units")) {
        only_keys(j["units"], "units", {"m", "hbar", "beta"});
        c.params.m = number(j["units"], "m", "units", c.params.m);
        c.params.hbar = number(j["units"], "hbar", "units", c.params.hbar);
        c.params.beta = number(j["units"], "beta", "units", c.params.beta);
    }
    if (j.contains("lambda")) c.params.lambda = complex_value(j["lambda"], "lambda");
    c.params.theta = number(j, "theta", "config", c.params.theta);
    c.deterministic = boolean(j, "deterministic", "config", c.deterministic);
    if (!c.deterministic) throw ConfigError("deterministic: only deterministic runs are supported");

    if (!(c.params.m > 0.0 && c.params.hbar > 0.0 && c.params.beta > 0.0))
        throw ConfigError("units: m, hbar and beta must be positive");
    if (!(c.params.theta > 0.0 && c.params.theta < kPi / 4.0))
        throw ConfigError("theta: must lie in (0, pi/4), got " + std::to_string(c.params.theta));
    try {
        c.params.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("model parameters: ") + e.what());
    }

    if (j.contains("spectrum")) {
        const auto& b = j["spectrum"];
        only_keys(b, "spectrum", {"n_max"});
        c.spectrum.n_max = integer(b, "n_max", "spectrum", c.spectrum.n_max);
    }
    if (c.spectrum.n_max < 0) throw ConfigError("spectrum.n_max: must be >= 0");

    if (j.contains("regions")) {
        const auto& b = j["regions"];
        only_keys(b, "regions", {"theta_min", "theta_max", "points"});
        c.regions.theta_min = number(b, "theta_min", "regions", c.regions.theta_min);
        c.regions.theta_max = number(b, "theta_max", "regions", c.regions.theta_max);
        c.regions.points = integer(b, "points", "regions", c.regions.points);
    }
    if (!(c.regions.theta_min > 0.0 && c.regions.theta_max < kPi / 4.0 && c.regions.theta_min < c.regions.theta_max))
        throw ConfigError("regions: need 0 < theta_min < theta_max < pi/4");
    if (c.regions.points < 2) throw ConfigError("regions.points: must be >= 2");

    if (j.contains("overlap")) {
        const auto& b = j["overlap"];
        only_keys(b, "overlap", {"contour", "hermitian", "kmin", "kmax", "n_bins", "grid", "eps", "alpha", "limit_width"});
        if (b.contains("contour")) {
            if (!b["contour"].is_string()) throw ConfigError("overlap.contour: expected a string");
            c.overlap.contour = b["contour"].get<std::string>();
        }
        c.overlap.hermitian = boolean(b, "hermitian", "overlap", c.overlap.contour == "real_axis");
        c.overlap.kmin = number(b, "kmin", "overlap", c.overlap.kmin);
        c.overlap.kmax = number(b, "kmax", "overlap", c.overlap.kmax);
        c.overlap.n_bins = integer(b, "n_bins", "overlap", c.overlap.n_bins);
        if (b.contains("grid")) c.overlap.grid = grid(b["grid"], "overlap.grid", c.overlap.grid);
        c.overlap.eps = numbers(b, "eps", "overlap", c.overlap.eps);
        c.overlap.alpha = numbers(b, "alpha", "overlap", c.overlap.alpha);
        c.overlap.limit_width = number(b, "limit_width", "overlap", c.overlap.limit_width);
    }
    if (!(c.overlap.limit_width > 0.0)) throw ConfigError("overlap.limit_width: must be positive");
    if (c.overlap.contour != "real_axis" && c.overlap.contour != "rotated_ray")
        throw ConfigError("overlap.contour: expected 'real_axis' or 'rotated_ray'");
    if (c.overlap.contour == "real_axis" && !c.overlap.hermitian)
        throw ConfigError("overlap.contour: 'real_axis' bins need hermitian = true");
    if (c.overlap.contour == "rotated_ray" && c.overlap.hermitian)
        throw ConfigError("overlap.hermitian: 'rotated_ray' bins are complex scaled");
    if (!(c.overlap.kmin >= 0.0 && c.overlap.kmin < c.overlap.kmax))
        throw ConfigError("overlap: need 0 <= kmin < kmax");
    if (c.overlap.n_bins < 1) throw ConfigError("overlap.n_bins: must be >= 1");
    for (double e : c.overlap.eps)
        if (!(e > 0.0)) throw ConfigError("overlap.eps: entries must be positive");
    for (std::size_t i = 1; i < c.overlap.eps.size(); ++i)
        if (!(c.overlap.eps[i] < c.overlap.eps[i - 1])) throw ConfigError("overlap.eps: must decrease toward lambda_bp");
    increasing(c.overlap.alpha, "overlap.alpha");

    if (j.contains("berry")) {
        const auto& b = j["berry"];
        only_keys(b, "berry", {"radius_rel", "n_steps", "windings", "resonance_on_plus", "alpha", "fit_min_rel",
                               "fit_max_rel", "fit_samples"});
        c.berry.radius_rel = number(b, "radius_rel", "berry", c.berry.radius_rel);
        c.berry.n_steps = integer(b, "n_steps", "berry", c.berry.n_steps);
        c.berry.windings = integer(b, "windings", "berry", c.berry.windings);
        c.berry.resonance_on_plus = boolean(b, "resonance_on_plus", "berry", c.berry.resonance_on_plus);
        c.berry.alpha = numbers(b, "alpha", "berry", c.berry.alpha);
        c.berry.fit_min_rel = number(b, "fit_min_rel", "berry", c.berry.fit_min_rel);
        c.berry.fit_max_rel = number(b, "fit_max_rel", "berry", c.berry.fit_max_rel);
        c.berry.fit_samples = integer(b, "fit_samples", "berry", c.berry.fit_samples);
    }
    if (!(c.berry.radius_rel > 0.0)) throw ConfigError("berry.radius_rel: must be positive");
    if (c.berry.n_steps < 64) throw ConfigError("berry.n_steps: must be >= 64");
    if (c.berry.windings == 0) throw ConfigError("berry.windings: must be non-zero");
    increasing(c.berry.alpha, "berry.alpha");
    if (!(c.berry.fit_min_rel > 1e-8 && c.berry.fit_max_rel < 1e-2 && c.berry.fit_min_rel < c.berry.fit_max_rel))
        throw ConfigError("berry: need 1e-8 < fit_min_rel < fit_max_rel < 1e-2");
    if (c.berry.fit_samples < 3) throw ConfigError("berry.fit_samples: must be >= 3");

    if (j.contains("wavefunction")) {
        const auto& b = j["wavefunction"];
        only_keys(b, "wavefunction", {"n", "k", "grid"});
        c.wavefunction.n = integer(b, "n", "wavefunction", c.wavefunction.n);
        if (b.contains("k")) {
            c.wavefunction.resonance = false;
            c.wavefunction.k = complex_value(b["k"], "wavefunction.k");
        }
        if (b.contains("grid")) c.wavefunction.grid = grid(b["grid"], "wavefunction.grid", c.wavefunction.grid);
    }
    if (c.wavefunction.n < 0) throw ConfigError("wavefunction.n: must be >= 0");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace csm
