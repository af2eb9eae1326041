#include "shen/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shen/fft.hpp"
#include "shen/kernel.hpp"
#include "shen/runner.hpp"
#include "shen/stats.hpp"

namespace shen::malliavin {

namespace {

// Slice storage guard; the forward tensor the scheme linearizes would be
// O(steps * n^2), the adjoint evaluation stores O(steps * n).
constexpr std::size_t kMaxSliceDoubles = std::size_t(1) << 23;

thread_local std::vector<std::complex<double>> tl_spec;

void apply_semigroup(Field& f, const std::vector<double>& mult, const GridSpec& grid) {
    tl_spec.resize(fft::spec_size(grid));
    fft::forward_r2c(grid, f.data(), tl_spec.data());
    for (std::size_t s = 0; s < tl_spec.size(); ++s) tl_spec[s] *= mult[s];
    fft::backward_c2r(grid, tl_spec.data(), f.data());
}

const Field& require_state(const solver::SolutionPath& path, int k) {
    const auto& f = path.states[static_cast<std::size_t>(k)];
    if (f.empty()) throw std::invalid_argument("path state not stored at requested step");
    return f;
}

const Field& require_increment(const solver::SolutionPath& path, int k) {
    const auto& f = path.increments[static_cast<std::size_t>(k)];
    if (f.empty()) throw std::invalid_argument("path increment not stored at requested step");
    return f;
}

}  // namespace

const Field& DerivativeField::slice(int r) const {
    static thread_local Field zeros;
    if (r >= first && r < obs_step) return slices[static_cast<std::size_t>(r - first)];
    zeros.assign(grid.sites(), 0.0);
    return zeros;
}

DerivativeField propagate_derivative(const solver::SolutionPath& path,
                                     const solver::SolverConfig& cfg, int first) {
    cfg.validate();
    if (!path.ok) throw std::invalid_argument("cannot differentiate an unstable path");
    if (first < 0 || first >= cfg.steps) throw std::invalid_argument("first step out of range");
    const std::size_t n = cfg.grid.sites();
    const std::size_t rows = static_cast<std::size_t>(cfg.steps - first);
    if (rows * n > kMaxSliceDoubles)
        throw std::invalid_argument("derivative tensor too large for this configuration");

    DerivativeField out;
    out.grid = cfg.grid;
    out.dt = cfg.dt;
    out.first = first;
    out.obs_step = cfg.steps;
    out.slices.resize(rows);

    const std::vector<double> mult = solver::step_multiplier(cfg.grid, cfg.dt);
    const double inv_cell = 1.0 / cfg.grid.cell();
    const auto sg = cfg.coeffs.sigma;
    const auto dsg = cfg.coeffs.dsigma;
    const auto db = cfg.coeffs.db;
    const bool linearized_trivial = (dsg == &coeffs::zero && db == &coeffs::zero);

    // psi_k(y) = d u_K(x_obs) / d u_k(y), propagated by the adjoint of the
    // linearized step; chi_r = S_dt psi_{r+1} and
    // D_{r,z} u_K(x_obs) = sigma(u_r(z)) chi_r(z) / h^d.
    Field psi(n, 0.0);
    psi[cfg.x_obs] = 1.0;

    for (int r = cfg.steps - 1; r >= first; --r) {
        apply_semigroup(psi, mult, cfg.grid);  // psi now holds chi_r
        const Field& u_r = require_state(path, r);
        Field& slice = out.slices[static_cast<std::size_t>(r - first)];
        slice.resize(n);
        for (std::size_t z = 0; z < n; ++z) slice[z] = sg(u_r[z]) * psi[z] * inv_cell;
        if (r > first && !linearized_trivial) {
            const Field& dW = require_increment(path, r);
            for (std::size_t z = 0; z < n; ++z)
                psi[z] *= 1.0 + db(u_r[z]) * cfg.dt + dsg(u_r[z]) * dW[z];
        }
    }
    return out;
}

Field forward_source_field(const solver::SolutionPath& path, const solver::SolverConfig& cfg,
                           int r, std::size_t z) {
    cfg.validate();
    if (r < 0 || r >= cfg.steps) throw std::invalid_argument("source step out of range");
    if (z >= cfg.grid.sites()) throw std::invalid_argument("source site out of range");

    const std::vector<double> mult = solver::step_multiplier(cfg.grid, cfg.dt);
    const auto dsg = cfg.coeffs.dsigma;
    const auto db = cfg.coeffs.db;

    Field d(cfg.grid.sites(), 0.0);
    d[z] = cfg.coeffs.sigma(require_state(path, r)[z]) / cfg.grid.cell();
    apply_semigroup(d, mult, cfg.grid);  // the kick rides step r's semigroup
    for (int k = r + 1; k < cfg.steps; ++k) {
        const Field& u_k = require_state(path, k);
        const Field& dW = require_increment(path, k);
        for (std::size_t j = 0; j < d.size(); ++j)
            d[j] *= 1.0 + db(u_k[j]) * cfg.dt + dsg(u_k[j]) * dW[j];
        apply_semigroup(d, mult, cfg.grid);
    }
    return d;
}

double ht_norm_sq(const DerivativeField& d, const spectral::SpectralMeasure& measure,
                  int a_step, int e_step) {
    if (a_step < 0 || e_step < a_step) throw std::invalid_argument("bad source window");
    const std::vector<double> w = spectral::spectral_weights(measure, d.grid);
    const int lo = std::max(a_step, d.first);
    const int hi = std::min(e_step, d.obs_step);
    double total = 0.0;
    for (int r = lo; r < hi; ++r)
        total += d.dt * spectral::h_norm_sq_weighted(
                            d.slices[static_cast<std::size_t>(r - d.first)], d.grid, w);
    return total;
}

report::ScalingReport lemma4_scaling(const solver::SolverConfig& cfg,
                                     const std::vector<int>& delta_steps, int p,
                                     std::size_t paths, int threads) {
    cfg.validate();
    if (delta_steps.size() < 2) throw std::invalid_argument("need at least two window widths");
    if (p < 1) throw std::invalid_argument("power must be >= 1");
    if (paths == 0) throw std::invalid_argument("need at least one path");
    int max_delta = 0;
    for (int d : delta_steps) {
        if (d <= 0 || d > cfg.steps) throw std::invalid_argument("window width out of range");
        max_delta = std::max(max_delta, d);
    }

    const int first = cfg.steps - max_delta;
    const std::vector<double> weights = spectral::spectral_weights(cfg.measure, cfg.grid);
    const std::vector<double> mult = solver::step_multiplier(cfg.grid, cfg.dt);
    const double inv_cell = 1.0 / cfg.grid.cell();
    const auto sg = cfg.coeffs.sigma;
    const auto dsg = cfg.coeffs.dsigma;
    const auto db = cfg.coeffs.db;

    // vals[j][i] = ||Du||^{2p} over the j-th trailing window on path i.
    std::vector<std::vector<double>> vals(delta_steps.size(),
                                          std::vector<double>(paths, 0.0));
    std::vector<char> good(paths, 0);

    run::parallel_for(paths, threads, [&](std::size_t i) {
        const solver::SolutionPath path =
            solver::simulate_path(cfg, static_cast<std::uint32_t>(i), first);
        if (!path.ok) return;

        thread_local Field psi;
        thread_local std::vector<double> norms;
        psi.assign(cfg.grid.sites(), 0.0);
        psi[cfg.x_obs] = 1.0;
        norms.assign(static_cast<std::size_t>(max_delta), 0.0);

        for (int r = cfg.steps - 1; r >= first; --r) {
            apply_semigroup(psi, mult, cfg.grid);
            const Field& u_r = path.states[static_cast<std::size_t>(r)];
            thread_local Field slice;
            slice.resize(psi.size());
            for (std::size_t z = 0; z < psi.size(); ++z)
                slice[z] = sg(u_r[z]) * psi[z] * inv_cell;
            norms[static_cast<std::size_t>(r - first)] =
                cfg.dt * spectral::h_norm_sq_weighted(slice, cfg.grid, weights);
            if (r > first) {
                const Field& dW = path.increments[static_cast<std::size_t>(r)];
                for (std::size_t z = 0; z < psi.size(); ++z)
                    psi[z] *= 1.0 + db(u_r[z]) * cfg.dt + dsg(u_r[z]) * dW[z];
            }
        }
        // suffix sums: window of width d covers source steps [steps - d, steps)
        double cum = 0.0;
        std::vector<double> window(static_cast<std::size_t>(max_delta) + 1, 0.0);
        for (int d = 1; d <= max_delta; ++d) {
            cum += norms[static_cast<std::size_t>(max_delta - d)];
            window[static_cast<std::size_t>(d)] = cum;
        }
        for (std::size_t j = 0; j < delta_steps.size(); ++j) {
            const double w = window[static_cast<std::size_t>(delta_steps[j])];
            vals[j][i] = p == 1 ? w : std::pow(w, p);
        }
        good[i] = 1;
    });

    kernel::PhiEvaluator phi(cfg.measure);
    report::ScalingReport rep;
    rep.quantity = "malliavin-window-norm";
    for (std::size_t j = 0; j < delta_steps.size(); ++j) {
        std::vector<double> ok_vals;
        ok_vals.reserve(paths);
        for (std::size_t i = 0; i < paths; ++i)
            if (good[i]) ok_vals.push_back(vals[j][i]);
        if (ok_vals.size() < 2) throw std::runtime_error("too many unstable paths");
        const auto s = stats::summarize(ok_vals);
        const double delta_t = delta_steps[j] * cfg.dt;
        rep.delta.push_back(delta_t);
        rep.scale.push_back(phi.phi(delta_t));
        rep.estimate.push_back(s.mean);
        rep.stderr_.push_back(s.stderr_);
    }
    rep.finalize(static_cast<double>(p), p == 1 ? 0.15 : 0.3);
    return rep;
}

NegativeMomentReport negative_moment_probe(const solver::SolverConfig& cfg, int a_step,
                                           int e_step, int p, std::size_t base_paths,
                                           int threads) {
    cfg.validate();
    if (!(cfg.coeffs.sigma_lower > 0.0))
        throw std::invalid_argument("negative moments require a nondegenerate preset");
    if (a_step < 0 || e_step <= a_step || e_step > cfg.steps)
        throw std::invalid_argument("need 0 <= a_step < e_step <= steps");
    if (p < 1) throw std::invalid_argument("moment order must be >= 1");
    if (base_paths < 2) throw std::invalid_argument("need at least two paths");

    kernel::PhiEvaluator phi(cfg.measure);
    const double T = cfg.horizon();
    const double bound = phi.phi(T - a_step * cfg.dt) - phi.phi(T - e_step * cfg.dt);
    if (!(bound > 0.0)) throw std::runtime_error("degenerate interval variance");

    NegativeMomentReport rep;
    rep.a_step = a_step;
    rep.e_step = e_step;
    rep.p = p;
    rep.delta_g = bound;
    rep.paths = 2 * base_paths;

    const solver::GammaTable gamma = solver::build_gamma_table(cfg, a_step);
    const std::vector<double> weights = spectral::spectral_weights(cfg.measure, cfg.grid);
    const std::vector<double> mult = solver::step_multiplier(cfg.grid, cfg.dt);
    const double cell = cfg.grid.cell();
    const auto sg = cfg.coeffs.sigma;
    const auto dsg = cfg.coeffs.dsigma;
    const auto db = cfg.coeffs.db;

    solver::SolverConfig sim = cfg;
    sim.steps = e_step;  // F_n only looks at increments before e_step

    std::vector<double> xs(rep.paths, 0.0);
    std::vector<char> good(rep.paths, 0);

    run::parallel_for(rep.paths, threads, [&](std::size_t i) {
        const solver::SolutionPath path =
            solver::simulate_path(sim, static_cast<std::uint32_t>(i), a_step);
        if (!path.ok) return;

        // adjoint accumulation for D_r F_n over the window:
        // a_k = gamma_k h^d (sigma'(u_k) dW_k + b'(u_k) dt) + v_k S[a_{k+1}]
        // D_r F_n = sigma(u_r) (gamma_r + S[a_{r+1}]/h^d)
        thread_local Field acc;
        thread_local Field slice;
        acc.assign(cfg.grid.sites(), 0.0);
        slice.resize(cfg.grid.sites());

        double total = 0.0;
        for (int k = e_step - 1; k >= a_step; --k) {
            const Field& u_k = path.states[static_cast<std::size_t>(k)];
            const Field& dW = path.increments[static_cast<std::size_t>(k)];
            const Field& gk = gamma.rows[static_cast<std::size_t>(k - a_step)];
            if (k < e_step - 1) apply_semigroup(acc, mult, cfg.grid);  // S[a_{k+1}]
            for (std::size_t z = 0; z < slice.size(); ++z)
                slice[z] = sg(u_k[z]) * (gk[z] + acc[z] / cell);
            total += cfg.dt * spectral::h_norm_sq_weighted(slice, cfg.grid, weights);
            if (k > a_step) {
                for (std::size_t z = 0; z < acc.size(); ++z) {
                    const double v = 1.0 + db(u_k[z]) * cfg.dt + dsg(u_k[z]) * dW[z];
                    acc[z] = gk[z] * cell * (dsg(u_k[z]) * dW[z] + db(u_k[z]) * cfg.dt) +
                             v * acc[z];
                }
            }
        }
        xs[i] = total / bound;
        good[i] = 1;
    });

    std::vector<double> first_half;
    rep.samples.reserve(rep.paths);
    for (std::size_t i = 0; i < rep.paths; ++i) {
        if (!good[i]) continue;
        rep.samples.push_back(xs[i]);
        if (i < base_paths) first_half.push_back(xs[i]);
    }
    if (rep.samples.size() < 2 || first_half.empty())
        throw std::runtime_error("too many unstable paths");

    auto neg_mean = [p](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += std::pow(x, -p);
        return s / static_cast<double>(v.size());
    };
    rep.neg_moment = neg_mean(rep.samples);
    rep.neg_moment_half = neg_mean(first_half);
    rep.stable = std::abs(rep.neg_moment - rep.neg_moment_half) < 0.10 * rep.neg_moment;

    // Small-ball ladder: thresholds sit below the median (the bulk is not a
    // small-ball regime), giving three halving comparisons.
    rep.median_x = stats::median(rep.samples);
    rep.eps = {rep.median_x / 2, rep.median_x / 4, rep.median_x / 8, rep.median_x / 16};
    const double n = static_cast<double>(rep.samples.size());
    for (double eps : rep.eps) {
        std::size_t c = 0;
        for (double x : rep.samples)
            if (x < eps) ++c;
        rep.tail_prob.push_back(static_cast<double>(c) / n);
    }
    rep.decay_pass = true;
    for (std::size_t j = 1; j < rep.tail_prob.size(); ++j) {
        const double hi = rep.tail_prob[j - 1];
        const double lo = rep.tail_prob[j];
        if (lo == 0.0) continue;  // empty tail decays as fast as the sample can show
        if (hi < 4.0 * lo) rep.decay_pass = false;
    }
    return rep;
}

}  // namespace shen::malliavin
