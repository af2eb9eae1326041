// Command-line front end: every experiment the library supports, emitted as
// CSV/JSON artifacts plus a manifest with content checksums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shen/checks.hpp"
#include "shen/config.hpp"
#include "shen/density.hpp"
#include "shen/kernel.hpp"
#include "shen/malliavin.hpp"
#include "shen/report.hpp"
#include "shen/runner.hpp"
#include "shen/taylor.hpp"

namespace {

namespace fs = std::filesystem;
using shen::config::ExperimentConfig;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInstability = 3;
constexpr int kExitAssertion = 4;

struct Common {
    std::string config_file;
    std::string preset;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    std::string out;
    int threads = 0;
    bool seed_set = false, paths_set = false, out_set = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_file, "JSON config file");
    sub->add_option("--preset", c.preset, "named preset (see `shen presets`)")
        ->excludes("--config");
    sub->add_option("--seed", c.seed, "RNG seed override");
    sub->add_option("--paths", c.paths, "Monte Carlo path count override");
    sub->add_option("--out", c.out, "output directory override");
    sub->add_option("--threads", c.threads, "worker threads (default: SHEN_THREADS or hardware)");
    sub->callback([sub, &c] {
        c.seed_set = sub->count("--seed") > 0;
        c.paths_set = sub->count("--paths") > 0;
        c.out_set = sub->count("--out") > 0;
    });
}

ExperimentConfig resolve_config(const Common& c) {
    ExperimentConfig cfg;
    if (!c.config_file.empty()) {
        auto parsed = shen::config::load_config_file(c.config_file);
        if (!parsed.ok()) throw std::invalid_argument(parsed.error_text());
        cfg = parsed.config;
    } else if (!c.preset.empty()) {
        cfg = shen::config::preset(c.preset);
    }
    if (c.seed_set) cfg.seed = c.seed;
    if (c.paths_set) cfg.paths = c.paths;
    if (c.out_set) cfg.out_dir = c.out;
    return cfg;
}

shen::report::RunManifest make_manifest(const std::string& command,
                                        const ExperimentConfig& cfg) {
    shen::report::RunManifest m;
    m.command = command;
    m.config_hash = cfg.hash();
    m.seed = cfg.seed;
    m.timestamp = shen::report::iso_timestamp();
    return m;
}

void finish(shen::report::RunManifest& m, const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::string cfg_file = cfg.out_dir + "/config.json";
    shen::report::write_text(cfg_file, cfg.canonical_json());
    m.add_artifact(cfg_file);
    m.write(cfg.out_dir + "/manifest.json");
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return cfg.out_dir + "/" + name;
}

json base_json(const ExperimentConfig& cfg) {
    json j;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    j["tool_version"] = shen::report::kToolVersion;
    return j;
}

int report_pass(const shen::report::RunManifest& m) {
    for (const auto& [name, ok] : m.checks)
        if (!ok) return kExitAssertion;
    return kExitOk;
}

std::vector<int> default_fractions(int steps, std::initializer_list<int> divisors) {
    std::vector<int> out;
    for (int d : divisors) {
        const int v = std::max(1, steps / d);
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
}

// ---- subcommands -------------------------------------------------------

int cmd_phi(const Common& c, int points) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("phi", cfg);
    shen::kernel::PhiEvaluator phi(cfg.measure);
    std::vector<double> t, jv, pv;
    for (int k = 1; k <= points; ++k) {
        t.push_back(cfg.T * k / points);
        jv.push_back(phi.j_rate(t.back()));
        pv.push_back(phi.phi(t.back()));
    }
    const std::string csv = out_path(cfg, "phi.csv");
    shen::report::write_csv(csv, {"t", "j", "phi"}, {t, jv, pv});
    m.add_artifact(csv);

    json j = base_json(cfg);
    j["measure"] = cfg.measure.name();
    j["T"] = cfg.T;
    j["phi_T"] = pv.back();
    j["closed_form"] = phi.has_closed_phi();
    const std::string js = out_path(cfg, "phi.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);
    m.checks.emplace_back("phi", true);
    finish(m, cfg);
    return kExitOk;
}

int cmd_dalang(const std::string& family, int dim, double param) {
    shen::spectral::SpectralMeasure ms = shen::spectral::SpectralMeasure::white(dim);
    if (family == "white")
        ms = shen::spectral::SpectralMeasure::white(dim);
    else if (family == "riesz")
        ms = shen::spectral::SpectralMeasure::riesz(param, dim);
    else if (family == "bessel")
        ms = shen::spectral::SpectralMeasure::bessel(param, dim);
    else if (family == "expcov")
        ms = shen::spectral::SpectralMeasure::exponential_cov(param);
    else
        throw std::invalid_argument("unknown family: " + family);

    const auto rep = shen::spectral::dalang_integral(ms, {10.0, 100.0, 1000.0, 10000.0});
    json j;
    j["measure"] = ms.name();
    j["cutoffs"] = rep.cutoffs;
    j["values"] = rep.values;
    j["increments"] = rep.increments;
    j["ratio"] = rep.ratio;
    j["converges"] = rep.converges;
    std::cout << j.dump(2) << "\n";
    return rep.converges ? kExitOk : kExitAssertion;
}

int cmd_simulate(const Common& c) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("simulate", cfg);
    const auto sim = cfg.solver();
    const auto gamma = shen::solver::build_gamma_table(sim, 0);

    std::vector<shen::solver::PathStats> stats(cfg.paths);
    shen::run::parallel_for(cfg.paths, c.threads, [&](std::size_t i) {
        stats[i] = shen::solver::run_path(sim, static_cast<std::uint32_t>(i), &gamma);
    });

    std::vector<double> idx, uo, sup, qv, drift;
    std::size_t failures = 0;
    double mean = 0.0, m2 = 0.0;
    std::size_t good = 0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (!stats[i].ok) {
            ++failures;
            continue;
        }
        idx.push_back(static_cast<double>(i));
        uo.push_back(stats[i].u_obs);
        sup.push_back(stats[i].sup_abs);
        qv.push_back(stats[i].qv);
        drift.push_back(stats[i].drift);
        ++good;
        const double d = stats[i].u_obs - mean;
        mean += d / static_cast<double>(good);
        m2 += d * (stats[i].u_obs - mean);
    }
    const std::string csv = out_path(cfg, "paths.csv");
    shen::report::write_csv(csv, {"path", "u_obs", "sup_abs", "qv", "drift"},
                            {idx, uo, sup, qv, drift});
    m.add_artifact(csv);

    json j = base_json(cfg);
    j["paths"] = cfg.paths;
    j["failures"] = failures;
    j["mean"] = mean;
    j["var"] = good > 1 ? m2 / static_cast<double>(good - 1) : 0.0;
    j["phi_T"] = shen::kernel::PhiEvaluator(cfg.measure).phi(cfg.T);
    const std::string js = out_path(cfg, "simulate.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);

    const bool stable = failures * 1000 <= cfg.paths;
    m.checks.emplace_back("stability", stable);
    finish(m, cfg);
    return stable ? kExitOk : kExitInstability;
}

int cmd_fn_seq(const Common& c, std::uint32_t path_index, std::vector<int> partition) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("fn-seq", cfg);
    const auto sim = cfg.solver();
    if (partition.empty()) {
        for (int k = 0; k <= 8; ++k) partition.push_back(sim.steps * k / 8);
    }
    const auto gamma = shen::solver::build_gamma_table(sim, 0);
    const auto fn = shen::solver::simulate_fn_sequence(sim, path_index, partition, gamma);
    if (!fn.ok) return kExitInstability;

    std::vector<double> pt, tt, vv;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        pt.push_back(partition[i]);
        tt.push_back(partition[i] * sim.dt);
        vv.push_back(fn.fn[i]);
    }
    const std::string csv = out_path(cfg, "fn-seq.csv");
    shen::report::write_csv(csv, {"step", "t", "fn"}, {pt, tt, vv});
    m.add_artifact(csv);

    // The accumulation telescopes: at the final partition point F_n must
    // reproduce the stepped observation exactly (up to roundoff).
    const bool telescopes = partition.back() == sim.steps;
    const double residual = telescopes ? std::abs(fn.fn.back() - fn.u_obs) : 0.0;
    const bool pass = !telescopes || residual <= 1e-8 * (1.0 + std::abs(fn.u_obs));

    json j = base_json(cfg);
    j["path"] = path_index;
    j["f0"] = fn.f0;
    j["u_obs"] = fn.u_obs;
    j["fn_final"] = fn.fn.back();
    j["residual"] = residual;
    j["pass"] = pass;
    const std::string js = out_path(cfg, "fn-seq.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);
    m.checks.emplace_back("telescoping", pass);
    finish(m, cfg);
    return pass ? kExitOk : kExitAssertion;
}

int cmd_malliavin_check(const Common& c, std::uint32_t path_index) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("malliavin-check", cfg);
    const auto sim = cfg.solver();
    const auto path = shen::solver::simulate_path(sim, path_index);
    if (!path.ok) return kExitInstability;
    const auto d = shen::malliavin::propagate_derivative(path, sim, 0);

    std::vector<double> rr, tt, slice_norm;
    for (int r = 0; r < sim.steps; ++r) {
        rr.push_back(r);
        tt.push_back(r * sim.dt);
        slice_norm.push_back(shen::malliavin::ht_norm_sq(d, sim.measure, r, r + 1) / sim.dt);
    }
    const std::string csv = out_path(cfg, "derivative-slices.csv");
    shen::report::write_csv(csv, {"r", "t", "h_norm_sq"}, {rr, tt, slice_norm});
    m.add_artifact(csv);

    // Cross-check the one-pass adjoint against direct forward propagation of
    // a few point sources.
    double cross_err = 0.0;
    const std::size_t n = sim.grid.sites();
    for (int r : {0, sim.steps / 2, sim.steps - 1}) {
        for (std::size_t z : {sim.x_obs, (sim.x_obs + n / 4) % n}) {
            const auto fwd = shen::malliavin::forward_source_field(path, sim, r, z);
            const double a = d.slice(r)[z];
            const double b = fwd[sim.x_obs];
            cross_err = std::max(cross_err, std::abs(a - b) / (1.0 + std::abs(b)));
        }
    }
    const bool cross_ok = cross_err < 1e-8;

    const double norm = shen::malliavin::ht_norm_sq(d, sim.measure, 0, sim.steps);
    const double phi_t = shen::kernel::PhiEvaluator(sim.measure).phi(sim.horizon());
    // Smoke tolerance: the stock presets run at cutoffs where the discrete
    // window norm sits a few percent under the continuum Phi.
    const bool linear = sim.coeffs.sigma == &shen::coeffs::one && sim.coeffs.b == &shen::coeffs::zero;
    const bool identity_ok = !linear || std::abs(norm - phi_t) / phi_t < 0.10;

    json j = base_json(cfg);
    j["path"] = path_index;
    j["window_norm_sq"] = norm;
    j["phi_T"] = phi_t;
    j["ratio"] = norm / phi_t;
    j["adjoint_vs_forward_max_rel_err"] = cross_err;
    j["linear_identity_applicable"] = linear;
    j["pass"] = cross_ok && identity_ok;
    const std::string js = out_path(cfg, "malliavin-check.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);
    m.checks.emplace_back("adjoint-vs-forward", cross_ok);
    m.checks.emplace_back("linear-identity", identity_ok);
    finish(m, cfg);
    return report_pass(m);
}

int cmd_lemma4(const Common& c, std::vector<int> deltas, int p) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("lemma4-scaling", cfg);
    const auto sim = cfg.solver();
    if (deltas.empty()) deltas = default_fractions(sim.steps, {32, 16, 8, 4});
    const auto rep = shen::malliavin::lemma4_scaling(sim, deltas, p, cfg.paths, c.threads);

    const std::string csv = out_path(cfg, "derivative-window-scaling.csv");
    shen::report::write_scaling_csv(csv, rep);
    m.add_artifact(csv);
    const std::string js = out_path(cfg, "derivative-window-scaling.json");
    shen::report::write_text(js, shen::report::scaling_json(rep, cfg.hash()));
    m.add_artifact(js);
    m.checks.emplace_back("window-scaling-slope", rep.pass);
    finish(m, cfg);
    return rep.pass ? kExitOk : kExitAssertion;
}

int cmd_smallball(const Common& c, int window, int p) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("smallball", cfg);
    const auto sim = cfg.solver();
    if (window <= 0) window = std::max(1, sim.steps / 8);
    if (window > sim.steps) throw std::invalid_argument("window exceeds step count");
    const auto rep = shen::malliavin::negative_moment_probe(sim, sim.steps - window, sim.steps,
                                                            p, cfg.paths, c.threads);

    std::vector<double> idx, xs;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        idx.push_back(static_cast<double>(i));
        xs.push_back(rep.samples[i]);
    }
    const std::string csv = out_path(cfg, "smallball-samples.csv");
    shen::report::write_csv(csv, {"path", "x"}, {idx, xs});
    m.add_artifact(csv);

    json j = base_json(cfg);
    j["a_step"] = rep.a_step;
    j["e_step"] = rep.e_step;
    j["p"] = rep.p;
    j["delta_g"] = rep.delta_g;
    j["paths"] = rep.paths;
    j["neg_moment"] = rep.neg_moment;
    j["neg_moment_half"] = rep.neg_moment_half;
    j["stable"] = rep.stable;
    j["median_x"] = rep.median_x;
    j["eps"] = rep.eps;
    j["tail_prob"] = rep.tail_prob;
    j["decay_pass"] = rep.decay_pass;
    j["pass"] = rep.stable && rep.decay_pass;
    const std::string js = out_path(cfg, "smallball.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);
    m.checks.emplace_back("negative-moment-stable", rep.stable);
    m.checks.emplace_back("tail-decay", rep.decay_pass);
    finish(m, cfg);
    return report_pass(m);
}

int cmd_taylor(const Common& c, const std::string& term, std::vector<int> widths, int p) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("taylor-scaling", cfg);
    const auto sim = cfg.solver();
    if (widths.empty()) widths = default_fractions(sim.steps, {64, 32, 16, 8});

    shen::taylor::TermKind kind;
    if (term == "j1")
        kind = shen::taylor::TermKind::J1;
    else if (term == "j2")
        kind = shen::taylor::TermKind::J2;
    else if (term == "r1")
        kind = shen::taylor::TermKind::R1Stoch;
    else if (term == "r2")
        kind = shen::taylor::TermKind::R2Drift;
    else
        throw std::invalid_argument("unknown term (want j1, j2, r1, r2): " + term);

    const auto set = shen::taylor::scaling_experiment(sim, widths, p, cfg.paths, c.threads);
    const auto& rep = set.by_kind(kind);

    const std::string csv = out_path(cfg, "taylor-" + term + ".csv");
    shen::report::write_scaling_csv(csv, rep);
    m.add_artifact(csv);
    const std::string js = out_path(cfg, "taylor-" + term + ".json");
    shen::report::write_text(js, shen::report::scaling_json(rep, cfg.hash()));
    m.add_artifact(js);
    m.checks.emplace_back("term-scaling-slope", rep.pass);
    finish(m, cfg);
    return rep.pass ? kExitOk : kExitAssertion;
}

int cmd_envelope(const Common& c) {
    const auto cfg = resolve_config(c);
    auto m = make_manifest("density-envelope", cfg);
    const auto sim = cfg.solver();
    const auto samples = shen::density::collect_samples(sim, cfg.paths, c.threads);
    const auto rep = shen::density::envelope_check(sim, samples);

    std::vector<double> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    const std::string samples_csv = out_path(cfg, "samples.csv");
    shen::report::write_csv(samples_csv, {"path", "value"}, {idx, samples});
    m.add_artifact(samples_csv);

    const std::string kde_csv = out_path(cfg, "kde.csv");
    shen::report::write_csv(kde_csv, {"y", "p_hat", "stderr", "lower_env", "upper_env"},
                            {rep.density.y, rep.density.p, rep.density.se, rep.lower_env,
                             rep.upper_env});
    m.add_artifact(kde_csv);

    json j = base_json(cfg);
    j["F0"] = rep.f0;
    j["phi_t"] = rep.phi_t;
    j["C1"] = rep.fit.C1;
    j["C2"] = rep.fit.C2;
    j["c1"] = rep.fit.c1;
    j["c2"] = rep.fit.c2;
    j["c3"] = rep.fit.c3;
    j["pass"] = rep.pass;
    const std::string js = out_path(cfg, "density-envelope.json");
    shen::report::write_text(js, j.dump(2) + "\n");
    m.add_artifact(js);
    m.checks.emplace_back("density-envelope", rep.pass);
    finish(m, cfg);
    return rep.pass ? kExitOk : kExitAssertion;
}

int cmd_all_checks(const Common& c) {
    shen::checks::Options opts;
    opts.seed = c.seed_set ? c.seed : 1;
    opts.threads = c.threads;
    opts.out_dir = c.out_set ? c.out : "out";
    opts.scratch_dir = opts.out_dir + "/determinism";
    opts.on_result = [](const shen::checks::CheckResult& r) {
        std::printf("%-34s %s  (%s) [%.1fs]\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    };
    const auto outcome = shen::checks::run_all(opts);
    std::printf("%zu/%zu checks passed\n",
                static_cast<std::size_t>(std::count_if(outcome.checks.begin(),
                                                       outcome.checks.end(),
                                                       [](const auto& r) { return r.pass; })),
                outcome.checks.size());
    return outcome.all_pass() ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic heat equation laboratory"};
    app.require_subcommand(1);

    Common common;

    auto* phi = app.add_subcommand("phi", "variance functional J and Phi over time");
    int phi_points = 20;
    add_common(phi, common);
    phi->add_option("--points", phi_points, "number of time points");

    auto* dalang = app.add_subcommand("dalang", "spectral integrability diagnostic");
    std::string da_family = "white";
    int da_dim = 1;
    double da_param = 0.5;
    dalang->add_option("--family", da_family, "white | riesz | bessel | expcov");
    dalang->add_option("--dim", da_dim, "spatial dimension");
    dalang->add_option("--param", da_param, "family parameter");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble of paths");
    add_common(simulate, common);

    auto* fnseq = app.add_subcommand("fn-seq", "mild-form partial accumulations on one path");
    std::uint32_t fn_path = 0;
    std::vector<int> fn_partition;
    add_common(fnseq, common);
    fnseq->add_option("--path", fn_path, "path index");
    fnseq->add_option("--partition", fn_partition, "partition step indices");

    auto* mcheck = app.add_subcommand("malliavin-check", "derivative identities on one path");
    std::uint32_t mc_path = 0;
    add_common(mcheck, common);
    mcheck->add_option("--path", mc_path, "path index");

    auto* lemma4 = app.add_subcommand("lemma4-scaling", "derivative window-norm scaling");
    std::vector<int> l4_deltas;
    int l4_p = 1;
    add_common(lemma4, common);
    lemma4->add_option("--deltas", l4_deltas, "window widths in steps");
    lemma4->add_option("--p", l4_p, "moment power");

    auto* smallball = app.add_subcommand("smallball", "negative-moment / small-ball probe");
    int sb_window = 0;
    int sb_p = 1;
    add_common(smallball, common);
    smallball->add_option("--window", sb_window, "window width in steps (default steps/8)");
    smallball->add_option("--p", sb_p, "negative-moment power");

    auto* taylor = app.add_subcommand("taylor-scaling", "expansion-term moment scaling");
    std::string ty_term = "j1";
    std::vector<int> ty_widths;
    int ty_p = 2;
    add_common(taylor, common);
    taylor->add_option("--term", ty_term, "j1 | j2 | r1 | r2");
    taylor->add_option("--widths", ty_widths, "interval widths in steps");
    taylor->add_option("--p", ty_p, "moment power");

    auto* envelope = app.add_subcommand("density-envelope", "two-sided Gaussian density envelope");
    add_common(envelope, common);

    auto* allchecks = app.add_subcommand("all-checks", "full verification battery");
    add_common(allchecks, common);

    auto* presets = app.add_subcommand("presets", "list named presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (phi->parsed()) return cmd_phi(common, phi_points);
        if (dalang->parsed()) return cmd_dalang(da_family, da_dim, da_param);
        if (simulate->parsed()) return cmd_simulate(common);
        if (fnseq->parsed()) return cmd_fn_seq(common, fn_path, fn_partition);
        if (mcheck->parsed()) return cmd_malliavin_check(common, mc_path);
        if (lemma4->parsed()) return cmd_lemma4(common, l4_deltas, l4_p);
        if (smallball->parsed()) return cmd_smallball(common, sb_window, sb_p);
        if (taylor->parsed()) return cmd_taylor(common, ty_term, ty_widths, ty_p);
        if (envelope->parsed()) return cmd_envelope(common);
        if (allchecks->parsed()) return cmd_all_checks(common);
        if (presets->parsed()) {
            for (const auto& name : shen::config::preset_names()) std::cout << name << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error:\n" << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        if (msg.find("unstable") != std::string::npos) {
            std::cerr << "instability: " << msg << "\n";
            return kExitInstability;
        }
        std::cerr << "error: " << msg << "\n";
        return kExitAssertion;
    }
    return kExitOk;
}
