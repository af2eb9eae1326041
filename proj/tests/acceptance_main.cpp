// Acceptance battery: one pass/fail line per criterion, exit 0 only when
// every criterion holds.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "shen/checks.hpp"

int main(int argc, char** argv) {
    shen::checks::Options opts;
    opts.out_dir = "acceptance-out";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        auto next = [&](const char* flag) -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "%s needs a value\n", flag);
                std::exit(2);
            }
            return argv[++i];
        };
        if (a == "--out")
            opts.out_dir = next("--out");
        else if (a == "--seed")
            opts.seed = std::strtoull(next("--seed"), nullptr, 10);
        else if (a == "--threads")
            opts.threads = static_cast<int>(std::strtol(next("--threads"), nullptr, 10));
        else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--seed N] [--threads N]\n", argv[0]);
            return 2;
        }
    }
    opts.scratch_dir = opts.out_dir + "/determinism";
    opts.on_result = [](const shen::checks::CheckResult& r) {
        std::printf("[%s] %s  %s  [%.1fs]\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    };

    const auto outcome = shen::checks::run_all(opts);
    std::size_t passed = 0;
    for (const auto& r : outcome.checks)
        if (r.pass) ++passed;
    std::printf("%zu/%zu criteria passed\n", passed, outcome.checks.size());
    return outcome.all_pass() ? 0 : 1;
}
