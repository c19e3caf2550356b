#pragma once

#include <string>
#include <vector>

#include "csm/eploop.hpp"
#include "csm/model.hpp"

namespace csm {

struct GridSpec {
    double beta_xmax = kDefaultXMax;
    int points = kDefaultGridPoints;
};

struct SpectrumBlock {
    int n_max = 2;
};

struct RegionsBlock {
    double theta_min = 0.02;
    double theta_max = 0.78;
    int points = 39;
};

struct OverlapBlock {
    // "real_axis" needs hermitian = true (the workflow then runs at theta = 0);
    // "rotated_ray" takes q = |k| bounds.
    std::string contour = "real_axis";
    bool hermitian = true;
    double kmin = 0.5;
    double kmax = 2.0;
    int n_bins = 6;
    GridSpec grid;
    // degeneracy series at lambda_bp + eps u_A; empty skips it
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> alpha = kDefaultAlpha;
    double limit_width = 0.2;  // rotated-ray bin around k_bp for the limit-exchange entries
};

struct BerryBlock {
    double radius_rel = 1e-6;  // R / lambda_bp
    int n_steps = 128;
    int windings = 4;
    bool resonance_on_plus = true;
    std::vector<double> alpha = kDefaultAlpha;
    double fit_min_rel = 1e-6;
    double fit_max_rel = 1e-4;
    int fit_samples = 9;
};

struct WavefunctionBlock {
    bool resonance = true;  // k from the n-th closed-form pole
    int n = 0;
    cplx k;                 // used when resonance is false
    GridSpec grid;
};

struct RunConfig {
    ModelParams params;
    SpectrumBlock spectrum;
    RegionsBlock regions;
    OverlapBlock overlap;
    BerryBlock berry;
    WavefunctionBlock wavefunction;
    bool deterministic = true;
};

// Missing keys keep their defaults; unknown keys, wrong types and out-of-range values
// throw ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace csm
