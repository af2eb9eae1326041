#include "shen/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shen/fft.hpp"
#include "shen/runner.hpp"

namespace shen::solver {

namespace {

thread_local std::vector<std::complex<double>> tl_spec;

std::vector<std::complex<double>>& spec_scratch(const GridSpec& grid) {
    tl_spec.resize(fft::spec_size(grid));
    return tl_spec;
}

bool all_finite(const Field& u) {
    for (double v : u) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// In-place Fourier multiplier application.
void apply_multiplier(Field& u, const std::vector<double>& mult, const GridSpec& grid) {
    auto& spec = spec_scratch(grid);
    fft::forward_r2c(grid, u.data(), spec.data());
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= mult[s];
    fft::backward_c2r(grid, spec.data(), u.data());
}

double max_abs(const Field& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

void SolverConfig::validate() const {
    grid.validate();
    measure.validate();
    if (measure.dim != grid.dim) throw std::invalid_argument("measure/grid dimension mismatch");
    if (!coeffs.b || !coeffs.db || !coeffs.sigma || !coeffs.dsigma)
        throw std::invalid_argument("coefficients must provide b, b', sigma, sigma'");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (steps <= 0) throw std::invalid_argument("steps must be positive");
    if (!u0.empty() && u0.size() != grid.sites())
        throw std::invalid_argument("u0 size does not match the grid");
    if (x_obs >= grid.sites()) throw std::invalid_argument("x_obs outside the grid");
}

std::vector<double> step_multiplier(const GridSpec& grid, double dt) {
    const std::size_t m = fft::spec_size(grid);
    const double norm = 1.0 / static_cast<double>(grid.sites());
    std::vector<double> mult(m);
    for (std::size_t s = 0; s < m; ++s)
        mult[s] = std::exp(-dt * fft::xi_norm_sq_half(grid, s)) * norm;
    return mult;
}

Field heat_semigroup(const Field& phi, double tau, const GridSpec& grid) {
    if (tau < 0.0) throw std::invalid_argument("semigroup time must be nonnegative");
    if (phi.size() != grid.sites()) throw std::invalid_argument("field size does not match grid");
    Field out = phi;
    if (tau == 0.0) return out;
    apply_multiplier(out, step_multiplier(grid, tau), grid);
    return out;
}

double heat_semigroup_at(const Field& phi, double tau, const GridSpec& grid, std::size_t site) {
    if (site >= grid.sites()) throw std::invalid_argument("site outside the grid");
    return heat_semigroup(phi, tau, grid)[site];
}

double f0(const SolverConfig& cfg, double t) {
    if (cfg.u0.empty()) return 0.0;
    if (t == 0.0) return cfg.u0[cfg.x_obs];
    return heat_semigroup_at(cfg.u0, t, cfg.grid, cfg.x_obs);
}

bool step(Field& u, const Field& dW, const SolverConfig& cfg,
          const std::vector<double>& semigroup_mult) {
    const auto b = cfg.coeffs.b;
    const auto sg = cfg.coeffs.sigma;
    const bool b_zero = (b == &coeffs::zero);
    const bool sigma_one = (sg == &coeffs::one);
    const double dt = cfg.dt;
    const std::size_t m = u.size();

    if (sigma_one && b_zero) {
        for (std::size_t j = 0; j < m; ++j) u[j] += dW[j];
    } else if (sigma_one) {
        for (std::size_t j = 0; j < m; ++j) u[j] += b(u[j]) * dt + dW[j];
    } else if (b_zero) {
        for (std::size_t j = 0; j < m; ++j) u[j] += sg(u[j]) * dW[j];
    } else {
        for (std::size_t j = 0; j < m; ++j) u[j] += b(u[j]) * dt + sg(u[j]) * dW[j];
    }
    apply_multiplier(u, semigroup_mult, cfg.grid);
    return all_finite(u);
}

SolutionPath simulate_path(const SolverConfig& cfg, std::uint32_t path_index,
                           int first_stored) {
    cfg.validate();
    if (first_stored < 0) first_stored = 0;

    SolutionPath out;
    out.states.resize(static_cast<std::size_t>(cfg.steps) + 1);
    out.increments.resize(static_cast<std::size_t>(cfg.steps));

    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);
    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);

    Field u = cfg.u0.empty() ? Field(cfg.grid.sites(), 0.0) : cfg.u0;
    Field dW(cfg.grid.sites());
    if (first_stored == 0) out.states[0] = u;

    for (int k = 0; k < cfg.steps; ++k) {
        synth.sample(cfg.seed, path_index, static_cast<std::uint32_t>(k), dW);
        if (k >= first_stored) out.increments[static_cast<std::size_t>(k)] = dW;
        if (!step(u, dW, cfg, mult)) {
            out.ok = false;
            out.failed_step = k;
            return out;
        }
        if (k + 1 >= first_stored) out.states[static_cast<std::size_t>(k) + 1] = u;
    }
    return out;
}

GammaTable build_gamma_table(const SolverConfig& cfg, int first) {
    cfg.validate();
    if (first < 0 || first >= cfg.steps) throw std::invalid_argument("gamma window out of range");

    GammaTable table;
    table.grid = cfg.grid;
    table.first = first;
    table.rows.resize(static_cast<std::size_t>(cfg.steps - first));

    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);
    Field cur(cfg.grid.sites(), 0.0);
    cur[cfg.x_obs] = 1.0 / cfg.grid.cell();
    // Iterated one-step multipliers, so that gamma_k matches the scheme's own
    // propagation of step k's increment exactly.
    for (int k = cfg.steps - 1; k >= first; --k) {
        apply_multiplier(cur, mult, cfg.grid);
        table.rows[static_cast<std::size_t>(k - first)] = cur;
    }
    return table;
}

PathStats run_path(const SolverConfig& cfg, std::uint32_t path_index, const GammaTable* gamma) {
    cfg.validate();
    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);
    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);
    const double cell = cfg.grid.cell();
    const auto b = cfg.coeffs.b;
    const auto sg = cfg.coeffs.sigma;
    const bool b_zero = (b == &coeffs::zero);
    const bool sigma_one = (sg == &coeffs::one);

    PathStats st;
    Field u = cfg.u0.empty() ? Field(cfg.grid.sites(), 0.0) : cfg.u0;
    Field dW(cfg.grid.sites());
    Field prod;
    st.sup_abs = max_abs(u);

    for (int k = 0; k < cfg.steps; ++k) {
        if (gamma && k >= gamma->first) {
            const Field& gk = gamma->rows[static_cast<std::size_t>(k - gamma->first)];
            if (sigma_one) {
                st.qv += cfg.dt * spectral::h_norm_sq_weighted(gk, cfg.grid, synth.weights());
            } else {
                prod.resize(u.size());
                for (std::size_t j = 0; j < u.size(); ++j) prod[j] = gk[j] * sg(u[j]);
                st.qv += cfg.dt * spectral::h_norm_sq_weighted(prod, cfg.grid, synth.weights());
            }
            if (!b_zero) {
                double inner = 0.0;
                for (std::size_t j = 0; j < u.size(); ++j) inner += gk[j] * b(u[j]);
                st.drift += inner * cell * cfg.dt;
            }
        }
        synth.sample(cfg.seed, path_index, static_cast<std::uint32_t>(k), dW);
        if (!step(u, dW, cfg, mult)) {
            st.ok = false;
            return st;
        }
        st.sup_abs = std::max(st.sup_abs, max_abs(u));
    }
    st.u_obs = u[cfg.x_obs];
    return st;
}

double observe_path(const SolverConfig& cfg, std::uint32_t path_index, bool* ok) {
    cfg.validate();
    if (ok) *ok = true;
    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);

    const bool additive =
        cfg.coeffs.sigma == &coeffs::one && cfg.coeffs.b == &coeffs::zero;
    if (additive) {
        const std::size_t sites = cfg.grid.sites();
        const std::size_t ns = fft::spec_size(cfg.grid);
        std::vector<double> semi(ns);
        for (std::size_t j = 0; j < ns; ++j)
            semi[j] = std::exp(-cfg.dt * fft::xi_norm_sq_half(cfg.grid, j));

        thread_local std::vector<std::complex<double>> acc, inc;
        thread_local Field dW, out;
        acc.assign(ns, {0.0, 0.0});
        inc.resize(ns);
        dW.resize(sites);
        out.resize(sites);

        if (!cfg.u0.empty()) fft::forward_r2c(cfg.grid, cfg.u0.data(), acc.data());
        for (int k = 0; k < cfg.steps; ++k) {
            synth.sample(cfg.seed, path_index, static_cast<std::uint32_t>(k), dW);
            fft::forward_r2c(cfg.grid, dW.data(), inc.data());
            for (std::size_t j = 0; j < ns; ++j) acc[j] = (acc[j] + inc[j]) * semi[j];
        }
        fft::backward_c2r(cfg.grid, acc.data(), out.data());
        const double v = out[cfg.x_obs] / static_cast<double>(sites);
        if (!std::isfinite(v) && ok) *ok = false;
        return v;
    }

    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);
    Field u = cfg.u0.empty() ? Field(cfg.grid.sites(), 0.0) : cfg.u0;
    Field dW(cfg.grid.sites());
    for (int k = 0; k < cfg.steps; ++k) {
        synth.sample(cfg.seed, path_index, static_cast<std::uint32_t>(k), dW);
        if (!step(u, dW, cfg, mult)) {
            if (ok) *ok = false;
            return 0.0;
        }
    }
    return u[cfg.x_obs];
}

FnSequence simulate_fn_sequence(const SolverConfig& cfg, std::uint32_t path_index,
                                const std::vector<int>& partition, const GammaTable& gamma) {
    cfg.validate();
    if (gamma.first != 0) throw std::invalid_argument("full gamma table required (first = 0)");
    for (std::size_t i = 0; i < partition.size(); ++i) {
        if (partition[i] < 0 || partition[i] > cfg.steps)
            throw std::invalid_argument("partition point outside [0, steps]");
        if (i > 0 && partition[i] < partition[i - 1])
            throw std::invalid_argument("partition must be nondecreasing");
    }

    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);
    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);
    const double cell = cfg.grid.cell();
    const auto b = cfg.coeffs.b;
    const auto sg = cfg.coeffs.sigma;
    const bool b_zero = (b == &coeffs::zero);

    FnSequence out;
    out.f0 = f0(cfg, cfg.horizon());
    out.fn.reserve(partition.size());

    Field u = cfg.u0.empty() ? Field(cfg.grid.sites(), 0.0) : cfg.u0;
    Field dW(cfg.grid.sites());
    double acc = out.f0;
    std::size_t next = 0;

    for (int k = 0; k < cfg.steps; ++k) {
        while (next < partition.size() && partition[next] == k) {
            out.fn.push_back(acc);
            ++next;
        }
        synth.sample(cfg.seed, path_index, static_cast<std::uint32_t>(k), dW);
        const Field& gk = gamma.rows[static_cast<std::size_t>(k)];
        double stoch = 0.0;
        double drift = 0.0;
        if (b_zero) {
            for (std::size_t j = 0; j < u.size(); ++j) stoch += gk[j] * sg(u[j]) * dW[j];
        } else {
            for (std::size_t j = 0; j < u.size(); ++j) {
                stoch += gk[j] * sg(u[j]) * dW[j];
                drift += gk[j] * b(u[j]);
            }
        }
        acc += stoch * cell + drift * cell * cfg.dt;
        if (!step(u, dW, cfg, mult)) {
            out.ok = false;
            return out;
        }
    }
    while (next < partition.size()) {
        out.fn.push_back(acc);
        ++next;
    }
    out.u_obs = u[cfg.x_obs];
    return out;
}

Field truncated_field(const SolutionPath& path, const SolverConfig& cfg, int a_step,
                      int s_step) {
    if (a_step < 0 || s_step < a_step || s_step > cfg.steps)
        throw std::invalid_argument("need 0 <= a_step <= s_step <= steps");
    const Field& base = path.states[static_cast<std::size_t>(a_step)];
    if (base.empty()) throw std::invalid_argument("state at a_step was not stored");
    return heat_semigroup(base, (s_step - a_step) * cfg.dt, cfg.grid);
}

MomentEstimate difference_moments(const SolverConfig& cfg, int a_step, int s_step, int p,
                                  std::size_t paths, int threads) {
    cfg.validate();
    if (a_step < 0 || s_step < a_step || s_step > cfg.steps)
        throw std::invalid_argument("need 0 <= a_step <= s_step <= steps");
    if (p < 1) throw std::invalid_argument("moment order must be >= 1");
    if (paths == 0) throw std::invalid_argument("need at least one path");

    const noise::Synth synth(cfg.grid, cfg.measure, cfg.dt);
    const std::vector<double> mult = step_multiplier(cfg.grid, cfg.dt);
    const std::vector<double> trunc_mult =
        s_step > a_step ? step_multiplier(cfg.grid, (s_step - a_step) * cfg.dt)
                        : std::vector<double>();

    std::vector<double> vals(paths, 0.0);
    std::vector<char> good(paths, 0);

    run::parallel_for(paths, threads, [&](std::size_t i) {
        thread_local Field u;
        thread_local Field dW;
        thread_local Field trunc;
        u.assign(cfg.grid.sites(), 0.0);
        if (!cfg.u0.empty()) u = cfg.u0;
        dW.resize(cfg.grid.sites());

        bool ok = true;
        for (int k = 0; k < a_step && ok; ++k) {
            synth.sample(cfg.seed, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), dW);
            ok = step(u, dW, cfg, mult);
        }
        if (ok) {
            trunc = u;
            if (s_step > a_step) apply_multiplier(trunc, trunc_mult, cfg.grid);
            for (int k = a_step; k < s_step && ok; ++k) {
                synth.sample(cfg.seed, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
                             dW);
                ok = step(u, dW, cfg, mult);
            }
        }
        if (ok) {
            const double d = u[cfg.x_obs] - trunc[cfg.x_obs];
            vals[i] = p == 1 ? std::abs(d) : std::pow(std::abs(d), p);
            good[i] = 1;
        }
    });

    MomentEstimate est;
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        if (!good[i]) {
            ++est.failures;
            continue;
        }
        sum += vals[i];
        sq += vals[i] * vals[i];
        ++est.paths;
    }
    if (est.paths == 0) throw std::runtime_error("all paths failed");
    const double n = static_cast<double>(est.paths);
    est.value = sum / n;
    if (est.paths > 1) {
        const double var = std::max(0.0, (sq - n * est.value * est.value) / (n - 1.0));
        est.stderr_ = std::sqrt(var / n);
    }
    return est;
}

}  // namespace shen::solver
