#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shen::checks {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    std::uint64_t seed = 1;
    int threads = 0;            // 0: resolve from SHEN_THREADS / hardware
    std::string out_dir;        // empty: no artifacts except the determinism probe
    std::string scratch_dir = "shen-determinism";  // used by the determinism check
    std::function<void(const CheckResult&)> on_result;  // streamed as each finishes
};

struct Outcome {
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;
    bool all_pass() const;
};

// The full verification battery: closed forms, linear-case identities,
// scaling slopes, pathwise bounds, density envelope, small-ball probe, and
// artifact determinism. Deterministic in (seed, thread-independent by design).
Outcome run_all(const Options& opts);

}  // namespace shen::checks
