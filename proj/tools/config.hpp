#pragma once

#include "json.hpp"

#include "wavop/cutoff.hpp"
#include "wavop/spectral.hpp"
#include "wavop/waveop.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wavop::cli {

using nlohmann::json;

struct ResolventParams {
    std::vector<double> lambdas;
    std::vector<double> rhos;
    int laguerre_nodes = 128;
    std::vector<double> expansion_lambdas; // empty: no expansion report
    bool include_a_term = true;
};

struct ClassifyParams {
    std::optional<double> e_tol;
};

struct InversionParams {
    std::vector<double> lambdas; // empty: the default ladder
    bool tune_coupling = true;
};

struct WaveopParams {
    int test_functions = 5;
    std::vector<double> times{-40};  // time-dependent oracle e^{itH} e^{-itH0}
    int oracle_box = 8;              // oracle grid: rmax and n both multiplied by this
    bool intertwining = true;
};

struct DecayParams {
    std::vector<double> ps;
    std::vector<double> times;
    double initial_width = 1; // u0 = exp(-r^2 / (2 w^2))
    bool project = true;
    bool band_limit = true;
};

struct HarmonicParams {
    // pairing: random (psi, u, lambda) triples drawn from --seed
    int pairing_triples = 0;
    double pairing_lambda_min = 0.01, pairing_lambda_max = 3;
    // profile grid for spherical averages: [-L, L] with 2 half + 1 nodes, s-quadrature on [0, smax]
    double profile_L = 12;
    int profile_half = 240;
    double profile_smax = 9;
    std::vector<double> k3_widths; // inputs exp(-w r^2)
    std::vector<std::pair<int, int>> tjk_pairs;
    double tjk_extent = 50, tjk_step = 2;
    std::vector<std::pair<std::string, std::string>> ap; // (a, p) as rational strings
    bool ap_probe = false;
};

using Params = std::variant<ResolventParams, ClassifyParams, InversionParams, WaveopParams, DecayParams, HarmonicParams>;

struct ExperimentConfig {
    std::string subcommand;
    json canonical;             // parsed tree with "_" keys removed
    std::string canonical_text; // canonical.dump(), the hashed form
    int m = 6;
    double rmax = 40;
    int n = 300;
    PotentialSpec potential;
    std::optional<HamiltonianOptions> hamiltonian;
    CutoffPair cut;
    LambdaQuadrature quad;
    Params params;

    GridPtr grid() const;
    HamiltonianOptions hamiltonian_or(HamiltonianOptions fallback) const { return hamiltonian.value_or(fallback); }
};

inline const std::vector<std::string> kSubcommands{"resolvent", "classify", "inversion", "waveop", "decay", "harmonic"};

// Reads, validates every field and range, and builds the typed config. Throws ConfigError.
ExperimentConfig load_config(const std::string& subcommand, const std::string& path);
ExperimentConfig parse_config(const std::string& subcommand, const json& tree, const std::string& base_dir = ".");

} // namespace wavop::cli
