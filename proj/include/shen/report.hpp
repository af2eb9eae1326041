#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shen/stats.hpp"

namespace shen::report {

inline constexpr const char* kToolVersion = "1.0.0";

// One scaling experiment: moment estimates against a shrinking scale variable,
// with a log-log fit and the slope the theory predicts.
struct ScalingReport {
    std::string quantity;
    std::vector<double> scale;      // abscissa (Phi(delta) or Delta_n(g))
    std::vector<double> delta;      // interval width in time units
    std::vector<double> estimate;   // moment estimate per scale
    std::vector<double> stderr_;    // Monte Carlo standard error per scale
    stats::LinFit fit;              // log(estimate) against log(scale)
    double expected_slope = 0.0;
    double slope_tol = 0.0;
    bool pass = false;

    void finalize(double expected, double tol);  // runs the fit, sets pass
};

// Numeric CSV with one header row; values printed with %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

void write_scaling_csv(const std::string& path, const ScalingReport& r);

// {slope, ci_low, ci_high, expected_slope, pass, points:[...]} (+ extras).
std::string scaling_json(const ScalingReport& r, std::uint64_t config_hash);

void write_text(const std::string& path, const std::string& text);

// FNV-1a 64-bit content hash (determinism checks, config identity).
std::uint64_t fnv1a(const void* data, std::size_t bytes);
std::uint64_t fnv1a(const std::string& text);
std::uint64_t hash_file(const std::string& path);

struct ManifestEntry {
    std::string path;    // as written
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;  // fnv1a of content
};

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string timestamp;  // the single field allowed to differ between runs
    std::vector<ManifestEntry> artifacts;
    std::vector<std::pair<std::string, bool>> checks;  // per-subcommand pass/fail

    void add_artifact(const std::string& path);
    void write(const std::string& path) const;
};

std::string iso_timestamp();

}  // namespace shen::report
