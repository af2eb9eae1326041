#include "shen/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shen/kernel.hpp"
#include "shen/runner.hpp"
#include "shen/stats.hpp"

namespace shen::density {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kReliableRelErr = 0.20;
constexpr double kGaussKernelL2 = 0.28209479177387814;  // 1/(2 sqrt(pi))

}  // namespace

std::vector<double> collect_samples(const solver::SolverConfig& cfg, std::size_t paths,
                                    int threads) {
    cfg.validate();
    if (paths == 0) throw std::invalid_argument("need at least one path");

    std::vector<double> vals(paths, 0.0);
    std::vector<char> good(paths, 0);
    run::parallel_for(paths, threads, [&](std::size_t i) {
        bool ok = false;
        const double v = solver::observe_path(cfg, static_cast<std::uint32_t>(i), &ok);
        if (!ok) return;
        vals[i] = v;
        good[i] = 1;
    });

    std::size_t failures = 0;
    std::vector<double> out;
    out.reserve(paths);
    for (std::size_t i = 0; i < paths; ++i) {
        if (good[i])
            out.push_back(vals[i]);
        else
            ++failures;
    }
    if (failures * 1000 > paths)
        throw std::runtime_error("more than 0.1% of paths unstable; refusing to aggregate");
    return out;
}

std::vector<double> make_grid(const std::vector<double>& samples, double span_sds,
                              std::size_t points) {
    if (points < 2) throw std::invalid_argument("grid needs at least two points");
    const auto s = stats::summarize(samples);
    const double sd = std::sqrt(std::max(s.var, 1e-300));
    const double lo = s.mean - span_sds * sd;
    const double hi = s.mean + span_sds * sd;
    std::vector<double> y(points);
    for (std::size_t i = 0; i < points; ++i)
        y[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return y;
}

Kde kde(const std::vector<double>& samples, const std::vector<double>& grid) {
    if (samples.size() < 1000) throw std::invalid_argument("kde needs at least 1000 samples");
    if (grid.size() < 2) throw std::invalid_argument("kde needs a grid");
    const auto s = stats::summarize(samples);
    if (!(s.var > 0.0)) throw std::invalid_argument("kde rejects zero-variance samples");

    Kde k;
    k.samples = samples.size();
    k.y = grid;
    const double m = static_cast<double>(samples.size());
    k.bandwidth = 1.06 * std::sqrt(s.var) * std::pow(m, -0.2);
    const double inv_bw = 1.0 / k.bandwidth;
    const double norm = inv_bw / (m * std::sqrt(2.0 * kPi));

    k.p.resize(grid.size());
    k.se.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (double x : samples) {
            const double z = (grid[i] - x) * inv_bw;
            if (z * z < 80.0) acc += std::exp(-0.5 * z * z);
        }
        k.p[i] = acc * norm;
        k.se[i] = std::sqrt(std::max(k.p[i], 0.0) * kGaussKernelL2 * inv_bw / m);
    }

    k.integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        k.integral += 0.5 * (k.p[i] + k.p[i - 1]) * (grid[i] - grid[i - 1]);

    // contiguous reliable run around the mode
    std::size_t mode = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (k.p[i] > k.p[mode]) mode = i;
    auto reliable_at = [&](std::size_t i) {
        return k.p[i] > 0.0 && k.se[i] < kReliableRelErr * k.p[i];
    };
    if (reliable_at(mode)) {
        std::size_t lo = mode, hi = mode + 1;
        while (lo > 0 && reliable_at(lo - 1)) --lo;
        while (hi < grid.size() && reliable_at(hi)) ++hi;
        k.lo = lo;
        k.hi = hi;
        k.y_lo = grid[lo];
        k.y_hi = grid[hi - 1];
    }
    return k;
}

GaussianCheck gaussian_case_check(const solver::SolverConfig& cfg, std::size_t paths,
                                  int threads) {
    if (cfg.coeffs.sigma != &coeffs::one || cfg.coeffs.b != &coeffs::zero)
        throw std::invalid_argument("gaussian case check needs sigma = 1, b = 0");
    const std::vector<double> samples = collect_samples(cfg, paths, threads);

    GaussianCheck g;
    g.paths = samples.size();
    g.f0 = solver::f0(cfg, cfg.horizon());
    g.phi_t = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
    const auto s = stats::summarize(samples);
    g.sample_mean = s.mean;
    g.sample_var = s.var;
    g.ks = stats::ks_statistic_normal(samples, g.f0, std::sqrt(g.phi_t));
    g.threshold = 1.63 / std::sqrt(static_cast<double>(samples.size()));
    g.pass = g.ks < g.threshold;
    return g;
}

DensityReport envelope_check(const solver::SolverConfig& cfg, const std::vector<double>& samples,
                             std::size_t grid_points, double span_sds) {
    cfg.validate();
    if (!(cfg.coeffs.sigma_lower > 0.0))
        throw std::invalid_argument("envelope check requires a nondegenerate preset");

    DensityReport rep;
    rep.samples = samples.size();
    rep.f0 = solver::f0(cfg, cfg.horizon());
    rep.phi_t = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
    rep.density = kde(samples, make_grid(samples, span_sds, grid_points));
    const Kde& k = rep.density;
    if (k.hi <= k.lo + 2) throw std::runtime_error("reliable KDE range too small to fit");

    const double sqrt_phi = std::sqrt(rep.phi_t);
    rep.fit.c3 = cfg.coeffs.b_sup * cfg.horizon();
    const double shift = rep.fit.c3 / sqrt_phi;

    // regression targets on the reliable range: log q against z^2 and w^2
    std::vector<double> z2, w2, logq;
    for (std::size_t i = k.lo; i < k.hi; ++i) {
        const double z = (k.y[i] - rep.f0) / sqrt_phi;
        const double w = std::max(std::abs(z) - shift, 0.0);
        z2.push_back(z * z);
        w2.push_back(w * w);
        logq.push_back(std::log(k.p[i] * sqrt_phi));
    }

    const auto lower_fit = stats::linear_fit(z2, logq);
    rep.fit.lower_rss = (1.0 - lower_fit.r2);
    bool lower_shape = lower_fit.slope < 0.0;
    if (lower_shape) {
        rep.fit.C2 = -1.0 / lower_fit.slope;
        double c1_log = 1e300;
        for (std::size_t i = 0; i < logq.size(); ++i)
            c1_log = std::min(c1_log, logq[i] + z2[i] / rep.fit.C2);
        rep.fit.C1 = std::exp(c1_log);
    }

    bool upper_shape = false;
    double sum_w2 = 0.0;
    for (double v : w2) sum_w2 += v;
    if (sum_w2 > 0.0) {
        const auto upper_fit = stats::linear_fit(w2, logq);
        rep.fit.upper_rss = (1.0 - upper_fit.r2);
        upper_shape = upper_fit.slope < 0.0;
        if (upper_shape) {
            rep.fit.c2 = -1.0 / upper_fit.slope;
            double c1_log = -1e300;
            for (std::size_t i = 0; i < logq.size(); ++i)
                c1_log = std::max(c1_log, logq[i] + w2[i] / rep.fit.c2);
            rep.fit.c1 = std::exp(c1_log);
        }
    }

    rep.lower_env.assign(k.y.size(), 0.0);
    rep.upper_env.assign(k.y.size(), 0.0);
    if (lower_shape && upper_shape) {
        for (std::size_t i = 0; i < k.y.size(); ++i) {
            const double z = (k.y[i] - rep.f0) / sqrt_phi;
            const double w = std::max(std::abs(z) - shift, 0.0);
            rep.lower_env[i] = rep.fit.C1 * std::exp(-z * z / rep.fit.C2) / sqrt_phi;
            rep.upper_env[i] = rep.fit.c1 * std::exp(-w * w / rep.fit.c2) / sqrt_phi;
        }
        rep.lower_ok = true;
        rep.upper_ok = true;
        rep.order_ok = true;
        const double slack = 1.0 + 1e-9;
        for (std::size_t i = k.lo; i < k.hi; ++i) {
            if (rep.lower_env[i] > k.p[i] * slack) rep.lower_ok = false;
            if (k.p[i] > rep.upper_env[i] * slack) rep.upper_ok = false;
            if (rep.lower_env[i] > rep.upper_env[i] * slack) rep.order_ok = false;
        }
        rep.gap_ok = rep.fit.C2 <= 10.0 * rep.fit.c2;
    }
    rep.pass = lower_shape && upper_shape && rep.lower_ok && rep.upper_ok && rep.order_ok &&
               rep.gap_ok;
    return rep;
}

PathBoundsReport path_bounds_check(const solver::SolverConfig& cfg, std::size_t paths,
                                   int threads) {
    cfg.validate();
    if (paths == 0) throw std::invalid_argument("need at least one path");

    const solver::GammaTable gamma = solver::build_gamma_table(cfg, 0);
    PathBoundsReport rep;
    rep.paths = paths;
    rep.phi_t = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
    rep.qv_limit = cfg.coeffs.sigma_sup * cfg.coeffs.sigma_sup * rep.phi_t * 1.02;
    rep.drift_limit = cfg.coeffs.b_sup * cfg.horizon() * 1.02 + 1e-12;

    std::vector<double> qv(paths, 0.0), drift(paths, 0.0);
    std::vector<char> good(paths, 0);
    run::parallel_for(paths, threads, [&](std::size_t i) {
        const auto st = solver::run_path(cfg, static_cast<std::uint32_t>(i), &gamma);
        if (!st.ok) return;
        qv[i] = st.qv;
        drift[i] = std::abs(st.drift);
        good[i] = 1;
    });

    for (std::size_t i = 0; i < paths; ++i) {
        if (!good[i]) {
            ++rep.failures;
            continue;
        }
        rep.max_qv = std::max(rep.max_qv, qv[i]);
        rep.max_drift = std::max(rep.max_drift, drift[i]);
        if (qv[i] > rep.qv_limit) ++rep.qv_violations;
        if (drift[i] > rep.drift_limit) ++rep.drift_violations;
    }
    rep.pass = rep.failures == 0 && rep.qv_violations == 0 && rep.drift_violations == 0;
    return rep;
}

}  // namespace shen::density
