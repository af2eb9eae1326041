#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shen/solver.hpp"

namespace shen::config {

// One experiment: grid + measure + coefficients + run sizes. Parsed from
// JSON, validated exhaustively (every violation reported, not just the
// first), and echoed canonically so configs round-trip byte-for-byte.
struct ExperimentConfig {
    GridSpec grid{1, 128, 16.0};
    spectral::SpectralMeasure measure = spectral::SpectralMeasure::white(1);
    std::string coefficients = "linear";

    std::string u0_type = "constant";  // constant | sine | delta | file
    double u0_value = 0.0;             // constant value | sine amplitude | delta mass
    int u0_mode = 1;                   // sine wavenumber
    std::size_t u0_site = 0;           // delta site
    std::string u0_file;

    double dt = 3.90625e-3;  // h^2/4 for the default grid
    double T = 0.5;
    std::size_t x_obs = static_cast<std::size_t>(-1);  // default: center site
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    int steps() const;                    // T / dt, validated integral
    std::size_t observation_site() const; // x_obs with the default resolved
    Field build_u0() const;
    solver::SolverConfig solver() const;

    std::string canonical_json() const;  // sorted keys, full precision
    std::uint64_t hash() const;
};

struct ParseResult {
    ExperimentConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string error_text() const;  // one violation per line
};

ParseResult parse_config(const std::string& json_text);
ParseResult load_config_file(const std::string& path);

// Frozen named configurations: {linear, sine, drift} x {white, riesz}, plus
// exponential-covariance variants used by the width-scaling experiments.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace shen::config
