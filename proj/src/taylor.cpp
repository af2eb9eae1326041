#include "shen/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shen/fft.hpp"
#include "shen/kernel.hpp"
#include "shen/runner.hpp"
#include "shen/stats.hpp"

namespace shen::taylor {

namespace {

constexpr double kDividedDifferenceFloor = 1e-12;

}  // namespace

const char* term_name(TermKind kind) {
    switch (kind) {
        case TermKind::J1: return "j1";
        case TermKind::J2: return "j2";
        case TermKind::R1Stoch: return "r1";
        case TermKind::R1Drift: return "r1-drift";
        case TermKind::R2Drift: return "r2";
    }
    return "?";
}

double term_value(const Terms& t, TermKind kind) {
    switch (kind) {
        case TermKind::J1: return t.j1;
        case TermKind::J2: return t.j2;
        case TermKind::R1Stoch: return t.r1_stoch;
        case TermKind::R1Drift: return t.r1_drift;
        case TermKind::R2Drift: return t.r2_drift;
    }
    return 0.0;
}

PartitionPlan make_partition(const solver::SolverConfig& cfg, const std::vector<int>& points) {
    cfg.validate();
    if (points.size() < 2) throw std::invalid_argument("partition needs at least two points");
    if (points.front() != 0 || points.back() != cfg.steps)
        throw std::invalid_argument("partition must start at 0 and end at steps");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i] <= points[i - 1])
            throw std::invalid_argument("partition points must increase");

    PartitionPlan plan;
    plan.points = points;
    plan.horizon = cfg.horizon();
    kernel::PhiEvaluator phi(cfg.measure);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = phi.phi(plan.horizon - points[i - 1] * cfg.dt) -
                         phi.phi(plan.horizon - points[i] * cfg.dt);
        if (!(d > 0.0)) throw std::runtime_error("interval variance must be positive");
        plan.delta_g.push_back(d);
    }
    return plan;
}

double delta_g(const PartitionPlan& plan, std::size_t interval) {
    if (interval >= plan.delta_g.size()) throw std::invalid_argument("interval out of range");
    return plan.delta_g[interval];
}

Terms compute_terms(const solver::SolutionPath& path, const solver::SolverConfig& cfg,
                    const solver::GammaTable& gamma, int a_step, int b_step) {
    if (a_step < 0 || b_step <= a_step || b_step > cfg.steps)
        throw std::invalid_argument("need 0 <= a_step < b_step <= steps");
    if (gamma.first > a_step) throw std::invalid_argument("gamma table misses the interval");
    if (!path.ok) throw std::invalid_argument("cannot expand an unstable path");

    const std::size_t sites = cfg.grid.sites();
    const double cell = cfg.grid.cell();
    const auto b = cfg.coeffs.b;
    const auto sg = cfg.coeffs.sigma;
    const auto dsg = cfg.coeffs.dsigma;
    const bool b_zero = (b == &coeffs::zero);

    // ubar_k evolved in the spectral domain: one decay multiply and one
    // backward transform per step.
    const std::size_t spec_n = fft::spec_size(cfg.grid);
    thread_local std::vector<std::complex<double>> master, scratch;
    thread_local Field ubar;
    master.resize(spec_n);
    scratch.resize(spec_n);
    ubar.resize(sites);

    std::vector<double> decay(spec_n);
    for (std::size_t s = 0; s < spec_n; ++s)
        decay[s] = std::exp(-cfg.dt * fft::xi_norm_sq_half(cfg.grid, s));
    const double inv_sites = 1.0 / static_cast<double>(sites);

    const Field& base = path.states[static_cast<std::size_t>(a_step)];
    if (base.empty()) throw std::invalid_argument("state at the interval start is missing");
    fft::forward_r2c(cfg.grid, base.data(), master.data());

    Terms t;
    double s_j1 = 0.0, s_j2 = 0.0, s_r1 = 0.0, s_r1d = 0.0, s_r2 = 0.0, s_diff = 0.0,
           s_diff_drift = 0.0;

    for (int k = a_step; k < b_step; ++k) {
        const Field* ubar_k;
        if (k == a_step) {
            ubar_k = &base;
        } else {
            for (std::size_t s = 0; s < spec_n; ++s) {
                master[s] *= decay[s];
                scratch[s] = master[s] * inv_sites;
            }
            fft::backward_c2r(cfg.grid, scratch.data(), ubar.data());
            ubar_k = &ubar;
        }
        const Field& u_k = path.states[static_cast<std::size_t>(k)];
        const Field& dW = path.increments[static_cast<std::size_t>(k)];
        const Field& gk = gamma.rows[static_cast<std::size_t>(k - gamma.first)];
        if (u_k.empty() || dW.empty())
            throw std::invalid_argument("path window does not cover the interval");

        for (std::size_t j = 0; j < sites; ++j) {
            const double ub = (*ubar_k)[j];
            const double sig_ub = sg(ub);
            const double g = gk[j];
            s_j1 += g * sig_ub * dW[j];
            const double du = u_k[j] - ub;
            const double dd =
                std::abs(du) < kDividedDifferenceFloor ? dsg(ub) : (sg(u_k[j]) - sig_ub) / du;
            s_r1 += g * dd * du * dW[j];
            s_diff += g * sg(u_k[j]) * dW[j];
            if (!b_zero) {
                const double b_ub = b(ub);
                const double b_u = b(u_k[j]);
                s_j2 += g * b_ub;
                s_r1d += g * b_u;
                s_r2 += g * (b_u - b_ub);
                s_diff_drift += g * b_u;
            }
        }
    }

    t.j1 = s_j1 * cell;
    t.j2 = s_j2 * cell * cfg.dt;
    t.r1_stoch = s_r1 * cell;
    t.r1_drift = s_r1d * cell * cfg.dt;
    t.r2_drift = s_r2 * cell * cfg.dt;
    t.fn_diff = s_diff * cell + s_diff_drift * cell * cfg.dt;
    t.identity_residual = std::abs(t.fn_diff - (t.j1 + t.j2 + t.r1_stoch + t.r2_drift));
    return t;
}

Terms compute_terms(const solver::SolutionPath& path, const PartitionPlan& plan,
                    std::size_t interval, const solver::SolverConfig& cfg,
                    const solver::GammaTable& gamma) {
    if (interval + 1 >= plan.points.size()) throw std::invalid_argument("interval out of range");
    return compute_terms(path, cfg, gamma, plan.points[interval], plan.points[interval + 1]);
}

const report::ScalingReport& ScalingSet::by_kind(TermKind kind) const {
    switch (kind) {
        case TermKind::J1: return j1;
        case TermKind::J2: return j2;
        case TermKind::R1Stoch: return r1_stoch;
        case TermKind::R1Drift: return r1_drift;
        case TermKind::R2Drift: return r2_drift;
    }
    return j1;
}

ScalingSet scaling_experiment(const solver::SolverConfig& cfg,
                              const std::vector<int>& width_steps, int p, std::size_t paths,
                              int threads) {
    cfg.validate();
    if (width_steps.size() < 2) throw std::invalid_argument("need at least two widths");
    if (p < 1) throw std::invalid_argument("power must be >= 1");
    if (paths < 2) throw std::invalid_argument("need at least two paths");
    int max_w = 0;
    for (int w : width_steps) {
        if (w <= 0 || w >= cfg.steps) throw std::invalid_argument("width out of range");
        max_w = std::max(max_w, w);
    }

    const int first = cfg.steps - max_w;
    const solver::GammaTable gamma = solver::build_gamma_table(cfg, first);

    constexpr std::size_t kKinds = 5;
    const std::size_t nw = width_steps.size();
    // vals[w * kKinds + kind][path]
    std::vector<std::vector<double>> vals(nw * kKinds, std::vector<double>(paths, 0.0));
    std::vector<double> residuals(paths, 0.0);
    std::vector<char> good(paths, 0);

    run::parallel_for(paths, threads, [&](std::size_t i) {
        const solver::SolutionPath path =
            solver::simulate_path(cfg, static_cast<std::uint32_t>(i), first);
        if (!path.ok) return;
        double res = 0.0;
        for (std::size_t w = 0; w < nw; ++w) {
            const Terms t = compute_terms(path, cfg, gamma, cfg.steps - width_steps[w],
                                          cfg.steps);
            res = std::max(res, t.identity_residual / (1.0 + std::abs(t.fn_diff)));
            for (std::size_t kind = 0; kind < kKinds; ++kind) {
                const double v = term_value(t, static_cast<TermKind>(kind));
                vals[w * kKinds + kind][i] =
                    p == 1 ? std::abs(v) : std::pow(std::abs(v), p);
            }
        }
        residuals[i] = res;
        good[i] = 1;
    });

    kernel::PhiEvaluator phi(cfg.measure);

    ScalingSet set;
    report::ScalingReport* reports[kKinds] = {&set.j1, &set.j2, &set.r1_stoch, &set.r1_drift,
                                              &set.r2_drift};
    const double expected[kKinds] = {0.5, 1.0, 1.0, 1.0, 1.5};
    const double tol[kKinds] = {0.1, 0.2, 0.2, 0.2, 0.3};

    for (std::size_t i = 0; i < paths; ++i) {
        if (good[i]) {
            set.max_identity_residual = std::max(set.max_identity_residual, residuals[i]);
        } else {
            ++set.failures;
        }
    }

    for (std::size_t kind = 0; kind < kKinds; ++kind) {
        auto& rep = *reports[kind];
        rep.quantity = std::string("taylor-") + term_name(static_cast<TermKind>(kind));
        for (std::size_t w = 0; w < nw; ++w) {
            std::vector<double> ok_vals;
            ok_vals.reserve(paths);
            for (std::size_t i = 0; i < paths; ++i)
                if (good[i]) ok_vals.push_back(vals[w * kKinds + kind][i]);
            if (ok_vals.size() < 2) throw std::runtime_error("too many unstable paths");
            const auto s = stats::summarize(ok_vals);
            const double width_t = width_steps[w] * cfg.dt;
            const double dg = phi.phi(width_t);  // final interval abuts T
            rep.delta.push_back(width_t);
            rep.scale.push_back(dg);
            // (E|term|^p)^{1/p} with a delta-method standard error
            const double est = std::pow(s.mean, 1.0 / p);
            rep.estimate.push_back(est);
            rep.stderr_.push_back(s.mean > 0.0
                                      ? s.stderr_ * est / (p * s.mean)
                                      : 0.0);
        }
        // the p-th root keeps the base slope for every p
        rep.finalize(expected[kind], tol[kind]);
    }
    return set;
}

}  // namespace shen::taylor
