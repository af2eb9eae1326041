#include "shen/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "shen/config.hpp"
#include "shen/density.hpp"
#include "shen/kernel.hpp"
#include "shen/malliavin.hpp"
#include "shen/noise.hpp"
#include "shen/report.hpp"
#include "shen/runner.hpp"
#include "shen/solver.hpp"
#include "shen/taylor.hpp"

namespace shen::checks {

namespace {

namespace fs = std::filesystem;
using solver::SolverConfig;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

SolverConfig from_preset(const std::string& name, GridSpec grid, double dt, int steps,
                         std::uint64_t seed) {
    config::ExperimentConfig e = config::preset(name);
    e.grid = grid;
    e.dt = dt;
    e.T = dt * steps;
    e.seed = seed;
    return e.solver();
}

// ---- individual criteria ----------------------------------------------

CheckResult check_phi_closed_form() {
    CheckResult r{"01-phi-closed-form", false, "", 0.0};
    kernel::PhiEvaluator phi(spectral::SpectralMeasure::white(1));
    double worst = 0.0;
    for (double t : {0.1, 0.5, 1.0}) {
        const double exact = phi.phi(t, kernel::Route::ClosedForm);
        const double quad = phi.phi(t, kernel::Route::Quadrature);
        worst = std::max(worst, std::abs(quad - exact) / exact);
    }
    r.pass = worst < 1e-6;
    r.detail = "max rel err " + fmt(worst) + " (tol 1e-6)";
    return r;
}

SolverConfig linear_variance_config(std::uint64_t seed) {
    return from_preset("linear-white", GridSpec{1, 256, 20.0}, 2.5e-4, 2000, seed);
}

CheckResult check_linear_variance(const std::vector<double>& samples, double phi_t) {
    CheckResult r{"02-linear-variance", false, "", 0.0};
    const auto s = stats::summarize(samples);
    const double rel = std::abs(s.var - phi_t) / phi_t;
    r.pass = rel < 0.05;
    r.detail = "var " + fmt(s.var) + " vs phi " + fmt(phi_t) + ", rel err " + fmt(rel) +
               " (tol 0.05)";
    return r;
}

CheckResult check_gaussian_ks(const std::vector<double>& samples, double phi_t) {
    CheckResult r{"03-gaussian-ks", false, "", 0.0};
    const double ks = stats::ks_statistic_normal(samples, 0.0, std::sqrt(phi_t));
    const double thr = 1.63 / std::sqrt(static_cast<double>(samples.size()));
    r.pass = ks < thr;
    r.detail = "ks " + fmt(ks) + " < " + fmt(thr);
    return r;
}

CheckResult check_malliavin_identity(std::uint64_t seed) {
    CheckResult r{"04-malliavin-linear-identity", false, "", 0.0};
    const SolverConfig cfg =
        from_preset("linear-white", GridSpec{1, 128, 8.0}, 0.5 / 256, 256, seed);
    const auto path = solver::simulate_path(cfg, 0);
    if (!path.ok) {
        r.detail = "path unstable";
        return r;
    }
    const auto d = malliavin::propagate_derivative(path, cfg, 0);
    const double norm = malliavin::ht_norm_sq(d, cfg.measure, 0, cfg.steps);
    const double phi_t = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
    const double rel = std::abs(norm - phi_t) / phi_t;
    r.pass = rel < 0.05;
    r.detail = "norm " + fmt(norm) + " vs phi " + fmt(phi_t) + ", rel err " + fmt(rel) +
               " (tol 0.05)";
    return r;
}

CheckResult check_lemma4_scaling(const Options& opts, report::ScalingReport* out) {
    CheckResult r{"05-derivative-window-scaling", false, "", 0.0};
    const SolverConfig cfg =
        from_preset("sine-white", GridSpec{1, 256, 12.0}, 1.25e-4, 4000, opts.seed);
    const auto rep =
        malliavin::lemma4_scaling(cfg, {80, 160, 320, 640, 1280}, 1, 2000, opts.threads);
    r.pass = rep.pass;
    r.detail = "slope " + fmt(rep.fit.slope) + " (want 1 +- 0.15)";
    if (out) *out = rep;
    return r;
}

CheckResult check_truncation_scaling(const Options& opts, report::ScalingReport* out) {
    CheckResult r{"06-truncation-scaling", false, "", 0.0};
    const SolverConfig cfg =
        from_preset("sine-white", GridSpec{1, 256, 12.0}, 2.5e-4, 2000, opts.seed);
    kernel::PhiEvaluator phi(cfg.measure);
    const int a = 1000;
    const std::vector<int> widths = {100, 200, 400, 800, 1000};
    const std::size_t paths = 4000;

    // One ensemble shared across the whole width ladder: each path is stepped
    // once to a + max(width) and compared against the heat flow of its own
    // state at step a.
    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);
    const std::vector<double> mult = solver::step_multiplier(cfg.grid, cfg.dt);
    std::vector<std::vector<double>> vals(widths.size(), std::vector<double>(paths, 0.0));
    std::vector<char> good(paths, 0);

    run::parallel_for(paths, opts.threads, [&](std::size_t i) {
        thread_local Field u;
        thread_local Field dW;
        u.assign(cfg.grid.sites(), 0.0);
        if (!cfg.u0.empty()) u = cfg.u0;
        dW.resize(cfg.grid.sites());

        bool ok = true;
        for (int k = 0; k < a && ok; ++k) {
            synth.sample(cfg.seed, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
                         dW);
            ok = solver::step(u, dW, cfg, mult);
        }
        if (!ok) return;
        const Field snapshot = u;
        std::size_t next = 0;
        for (int k = a; k < a + widths.back() && ok; ++k) {
            synth.sample(cfg.seed, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
                         dW);
            ok = solver::step(u, dW, cfg, mult);
            if (ok && next < widths.size() && k + 1 - a == widths[next]) {
                const double ref = solver::heat_semigroup_at(snapshot, widths[next] * cfg.dt,
                                                             cfg.grid, cfg.x_obs);
                const double d = u[cfg.x_obs] - ref;
                vals[next][i] = d * d;
                ++next;
            }
        }
        good[i] = ok ? 1 : 0;
    });

    report::ScalingReport rep;
    rep.quantity = "truncation-moment";
    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < paths; ++i) {
            if (!good[i]) continue;
            sum += vals[wi][i];
            sumsq += vals[wi][i] * vals[wi][i];
            ++m;
        }
        if (m < 2) throw std::runtime_error("all paths unstable in truncation scaling");
        const double mean = sum / static_cast<double>(m);
        const double var = std::max(0.0, sumsq / static_cast<double>(m) - mean * mean);
        rep.delta.push_back(widths[wi] * cfg.dt);
        rep.scale.push_back(phi.phi(widths[wi] * cfg.dt));
        rep.estimate.push_back(mean);
        rep.stderr_.push_back(std::sqrt(var / static_cast<double>(m)));
    }
    rep.finalize(1.0, 0.15);
    r.pass = rep.pass;
    r.detail = "slope " + fmt(rep.fit.slope) + " (want 1 +- 0.15)";
    if (out) *out = rep;
    return r;
}

CheckResult check_taylor_identity(const Options& opts) {
    CheckResult r{"07-taylor-identity", false, "", 0.0};
    double worst = 0.0;
    std::string worst_preset = "-";
    const std::vector<int> points = {0, 16, 32, 48, 64};
    for (const auto& name : config::preset_names()) {
        const SolverConfig cfg =
            from_preset(name, GridSpec{1, 64, 12.0}, 0.25 / 64, 64, opts.seed);
        const auto gamma = solver::build_gamma_table(cfg, 0);
        const auto plan = taylor::make_partition(cfg, points);
        const double f0 = solver::f0(cfg, cfg.horizon());
        for (std::uint32_t p = 0; p < 200; ++p) {
            const auto path = solver::simulate_path(cfg, p);
            if (!path.ok) continue;
            double fn = f0;
            for (std::size_t iv = 0; iv + 1 < points.size(); ++iv) {
                const auto t = taylor::compute_terms(path, plan, iv, cfg, gamma);
                fn += t.fn_diff;
                const double rel = t.identity_residual / (1.0 + std::abs(fn));
                if (rel > worst) {
                    worst = rel;
                    worst_preset = name;
                }
            }
        }
    }
    r.pass = worst < 1e-9;
    r.detail = "max residual " + fmt(worst) + " (" + worst_preset + ", tol 1e-9)";
    return r;
}

CheckResult check_taylor_scaling(const Options& opts, taylor::ScalingSet* out) {
    CheckResult r{"08-taylor-term-scaling", false, "", 0.0};
    const SolverConfig cfg =
        from_preset("drift-expcov", GridSpec{1, 64, 8.0}, 5e-4, 600, opts.seed);
    const auto set =
        taylor::scaling_experiment(cfg, {10, 20, 40, 80, 160}, 2, 20000, opts.threads);
    r.pass = set.j1.pass && set.j2.pass && set.r1_stoch.pass;
    r.detail = "slopes j1 " + fmt(set.j1.fit.slope) + " (0.5 +- 0.1), j2 " +
               fmt(set.j2.fit.slope) + " (1 +- 0.2), r1 " + fmt(set.r1_stoch.fit.slope) +
               " (1 +- 0.2)";
    if (out) *out = set;
    return r;
}

CheckResult check_path_bounds(const Options& opts) {
    CheckResult r{"09-path-bounds", false, "", 0.0};
    bool all = true;
    double worst_qv = 0.0, worst_drift = 0.0;
    for (const auto& name : config::preset_names()) {
        const SolverConfig cfg =
            from_preset(name, GridSpec{1, 128, 16.0}, 3.90625e-3, 77, opts.seed);
        const auto rep = density::path_bounds_check(cfg, 1000, opts.threads);
        all = all && rep.pass;
        worst_qv = std::max(worst_qv, rep.max_qv / rep.qv_limit);
        if (rep.drift_limit > 1e-12)
            worst_drift = std::max(worst_drift, rep.max_drift / rep.drift_limit);
    }
    r.pass = all;
    r.detail = "max qv/limit " + fmt(worst_qv) + ", max drift/limit " + fmt(worst_drift);
    return r;
}

CheckResult check_envelope(const Options& opts, density::DensityReport* sine_out,
                           density::DensityReport* linear_out) {
    CheckResult r{"10-density-envelope", false, "", 0.0};
    const GridSpec grid{1, 128, 16.0};
    const double dt = 3.90625e-3;

    const SolverConfig sine = from_preset("sine-white", grid, dt, 128, opts.seed);
    const auto sine_samples = density::collect_samples(sine, 200000, opts.threads);
    const auto sine_rep = density::envelope_check(sine, sine_samples);

    const SolverConfig lin = from_preset("linear-white", grid, dt, 128, opts.seed);
    const auto lin_samples = density::collect_samples(lin, 200000, opts.threads);
    const auto lin_rep = density::envelope_check(lin, lin_samples);

    const bool gauss_constants = std::abs(lin_rep.fit.C2 - 2.0) <= 0.5 &&
                                 std::abs(lin_rep.fit.c2 - 2.0) <= 0.5;
    r.pass = sine_rep.pass && lin_rep.pass && gauss_constants;
    r.detail = "sine pass " + std::string(sine_rep.pass ? "yes" : "no") + " (C2 " +
               fmt(sine_rep.fit.C2) + ", c2 " + fmt(sine_rep.fit.c2) + "); linear C2 " +
               fmt(lin_rep.fit.C2) + ", c2 " + fmt(lin_rep.fit.c2) + " (want 2 +- 0.5)";
    if (sine_out) *sine_out = sine_rep;
    if (linear_out) *linear_out = lin_rep;
    return r;
}

CheckResult check_smallball(const Options& opts) {
    CheckResult r{"11-small-ball", false, "", 0.0};
    bool all = true;
    std::ostringstream det;
    for (const auto& name : config::preset_names()) {
        const SolverConfig cfg =
            from_preset(name, GridSpec{1, 64, 12.0}, 8.7890625e-3, 32, opts.seed);
        const auto rep =
            malliavin::negative_moment_probe(cfg, cfg.steps - 6, cfg.steps, 1, 2000,
                                             opts.threads);
        const bool ok = rep.stable && rep.decay_pass;
        all = all && ok;
        if (!ok) det << name << (rep.stable ? "" : " moment-unstable")
                     << (rep.decay_pass ? "" : " slow-tail") << "; ";
    }
    r.pass = all;
    r.detail = all ? "decay >= 4x/halving and stable E[1/X] on all 9 presets" : det.str();
    return r;
}

// Small artifact bundle exercising every emission path; used twice by the
// determinism criterion.
std::vector<std::string> emit_bundle(const std::string& dir, std::uint64_t seed, int threads) {
    fs::create_directories(dir);
    std::vector<std::string> files;
    auto path = [&dir, &files](const std::string& f) {
        files.push_back(dir + "/" + f);
        return files.back();
    };

    {  // variance functional curve
        kernel::PhiEvaluator phi(spectral::SpectralMeasure::white(1));
        std::vector<double> t, jv, pv;
        for (int i = 1; i <= 10; ++i) {
            t.push_back(0.05 * i);
            jv.push_back(phi.j_rate(t.back()));
            pv.push_back(phi.phi(t.back()));
        }
        report::write_csv(path("phi.csv"), {"t", "j", "phi"}, {t, jv, pv});
    }
    const SolverConfig cfg = from_preset("sine-white", GridSpec{1, 64, 12.0}, 2e-3, 50, seed);
    {  // final state dump
        const auto p = solver::simulate_path(cfg, 0);
        noise::write_field_dump(path("state.bin"), cfg.grid, cfg.dt,
                                static_cast<std::uint32_t>(cfg.steps), p.states.back());
    }
    {  // partial-accumulation sequence
        const auto gamma = solver::build_gamma_table(cfg, 0);
        const auto fn = solver::simulate_fn_sequence(cfg, 1, {0, 10, 20, 30, 40, 50}, gamma);
        std::vector<double> idx, val;
        for (std::size_t i = 0; i < fn.fn.size(); ++i) {
            idx.push_back(static_cast<double>(i));
            val.push_back(fn.fn[i]);
        }
        report::write_csv(path("fnseq.csv"), {"point", "fn"}, {idx, val});
    }
    {  // derivative window scaling, small
        const auto rep = malliavin::lemma4_scaling(cfg, {5, 10, 20, 40}, 1, 50, threads);
        report::write_scaling_csv(path("lemma4.csv"), rep);
        report::write_text(path("lemma4.json"), report::scaling_json(rep, 0));
    }
    {  // taylor scaling, small
        const auto set = taylor::scaling_experiment(cfg, {5, 10, 20}, 2, 100, threads);
        report::write_scaling_csv(path("taylor-j1.csv"), set.j1);
    }
    {  // small-ball probe
        const auto rep =
            malliavin::negative_moment_probe(cfg, cfg.steps - 5, cfg.steps, 1, 100, threads);
        std::vector<double> xs = rep.samples;
        report::write_csv(path("smallball.csv"), {"x"}, {xs});
    }
    {  // gaussian check summary
        const SolverConfig lin =
            from_preset("linear-white", GridSpec{1, 64, 12.0}, 2e-3, 50, seed);
        const auto g = density::gaussian_case_check(lin, 2000, threads);
        nlohmann::json j;
        j["ks"] = g.ks;
        j["threshold"] = g.threshold;
        j["sample_var"] = g.sample_var;
        j["pass"] = g.pass;
        report::write_text(path("gauss.json"), j.dump(2) + "\n");
    }
    return files;
}

CheckResult check_determinism(const Options& opts) {
    CheckResult r{"12-determinism", false, "", 0.0};
    const std::string base =
        opts.scratch_dir.empty() ? std::string("shen-determinism") : opts.scratch_dir;
    const auto a = emit_bundle(base + "/run-a", opts.seed, opts.threads);
    const auto b = emit_bundle(base + "/run-b", opts.seed, opts.threads);
    if (a.size() != b.size()) {
        r.detail = "bundle size mismatch";
        return r;
    }
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (report::hash_file(a[i]) != report::hash_file(b[i])) ++mismatches;
    r.pass = mismatches == 0;
    r.detail = std::to_string(a.size()) + " artifacts, " + std::to_string(mismatches) +
               " checksum mismatches";
    return r;
}

void write_summary(const Options& opts, Outcome& out) {
    if (opts.out_dir.empty()) return;
    fs::create_directories(opts.out_dir);
    nlohmann::json j;
    j["seed"] = opts.seed;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : out.checks)
        j["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"detail", c.detail},
                               {"seconds", c.seconds}});
    const std::string file = opts.out_dir + "/checks.json";
    report::write_text(file, j.dump(2) + "\n");
    out.artifacts.push_back(file);
}

}  // namespace

bool Outcome::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

Outcome run_all(const Options& opts) {
    Outcome out;
    auto timed = [&out, &opts](CheckResult r, std::chrono::steady_clock::time_point t0) {
        const auto t1 = std::chrono::steady_clock::now();
        r.seconds = std::chrono::duration<double>(t1 - t0).count();
        out.checks.push_back(std::move(r));
        if (opts.on_result) opts.on_result(out.checks.back());
    };
    auto now = [] { return std::chrono::steady_clock::now(); };

    {
        auto t0 = now();
        timed(check_phi_closed_form(), t0);
    }
    {
        auto t0 = now();
        const SolverConfig cfg = linear_variance_config(opts.seed);
        const double phi_t = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
        const auto samples = density::collect_samples(cfg, 100000, opts.threads);
        timed(check_linear_variance(samples, phi_t), t0);
        auto t1 = now();
        timed(check_gaussian_ks(samples, phi_t), t1);
    }
    {
        auto t0 = now();
        timed(check_malliavin_identity(opts.seed), t0);
    }
    {
        auto t0 = now();
        report::ScalingReport rep;
        auto r = check_lemma4_scaling(opts, &rep);
        if (!opts.out_dir.empty()) {
            fs::create_directories(opts.out_dir);
            const std::string f = opts.out_dir + "/derivative-window-scaling.csv";
            report::write_scaling_csv(f, rep);
            out.artifacts.push_back(f);
        }
        timed(std::move(r), t0);
    }
    {
        auto t0 = now();
        report::ScalingReport rep;
        auto r = check_truncation_scaling(opts, &rep);
        if (!opts.out_dir.empty()) {
            fs::create_directories(opts.out_dir);
            const std::string f = opts.out_dir + "/truncation-scaling.csv";
            report::write_scaling_csv(f, rep);
            out.artifacts.push_back(f);
        }
        timed(std::move(r), t0);
    }
    {
        auto t0 = now();
        timed(check_taylor_identity(opts), t0);
    }
    {
        auto t0 = now();
        taylor::ScalingSet set;
        auto r = check_taylor_scaling(opts, &set);
        if (!opts.out_dir.empty()) {
            fs::create_directories(opts.out_dir);
            for (const auto* rep : {&set.j1, &set.j2, &set.r1_stoch}) {
                const std::string f = opts.out_dir + "/" + rep->quantity + ".csv";
                report::write_scaling_csv(f, *rep);
                out.artifacts.push_back(f);
            }
        }
        timed(std::move(r), t0);
    }
    {
        auto t0 = now();
        timed(check_path_bounds(opts), t0);
    }
    {
        auto t0 = now();
        timed(check_envelope(opts, nullptr, nullptr), t0);
    }
    {
        auto t0 = now();
        timed(check_smallball(opts), t0);
    }
    {
        auto t0 = now();
        timed(check_determinism(opts), t0);
    }

    write_summary(opts, out);
    return out;
}

}  // namespace shen::checks
