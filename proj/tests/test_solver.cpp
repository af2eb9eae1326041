#include <cmath>
#include <vector>

#include "doctest.h"
#include "shen/fft.hpp"
#include "shen/kernel.hpp"
#include "shen/solver.hpp"
#include "shen/stats.hpp"

using namespace shen;
using solver::SolverConfig;

namespace {

constexpr double kPi = 3.14159265358979323846;

double quiet(double) { return 0.0; }
double const_drift(double) { return 0.25; }
double explode(double v) { return 1e8 * (1.0 + v * v); }

Coefficients no_noise() { return {&quiet, &quiet, &quiet, &quiet, 0.0, 0.0, 0.0, "none"}; }

SolverConfig base_config() {
    SolverConfig cfg;
    cfg.grid = GridSpec{1, 64, 8.0};
    cfg.measure = spectral::SpectralMeasure::white(1);
    cfg.coeffs = coeffs::linear();
    cfg.dt = 1e-3;
    cfg.steps = 100;
    cfg.x_obs = 32;
    cfg.seed = 21;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    auto cfg = base_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = base_config();
    cfg.x_obs = cfg.grid.sites();
    CHECK_THROWS(cfg.validate());
    cfg = base_config();
    cfg.u0.assign(3, 0.0);
    CHECK_THROWS(cfg.validate());
    cfg = base_config();
    cfg.measure = spectral::SpectralMeasure::white(2);
    CHECK_THROWS(cfg.validate());  // dim mismatch with the grid
}

TEST_CASE("deterministic heat flow is exact for eigenfunctions") {
    auto cfg = base_config();
    cfg.coeffs = no_noise();
    cfg.u0.resize(cfg.grid.sites());
    const double xi = 2.0 * kPi / cfg.grid.L;
    for (std::size_t j = 0; j < cfg.u0.size(); ++j)
        cfg.u0[j] = std::sin(xi * static_cast<double>(j) * cfg.grid.h());

    const auto path = solver::simulate_path(cfg, 0);
    REQUIRE(path.ok);
    const double decay = std::exp(-cfg.horizon() * xi * xi);
    for (std::size_t j = 0; j < cfg.u0.size(); ++j)
        CHECK(path.states.back()[j] == doctest::Approx(decay * cfg.u0[j]).epsilon(1e-11));
}

TEST_CASE("constant drift integrates exactly") {
    auto cfg = base_config();
    cfg.coeffs = no_noise();
    cfg.coeffs.b = &const_drift;
    cfg.coeffs.b_sup = 0.25;
    const auto path = solver::simulate_path(cfg, 0);
    REQUIRE(path.ok);
    // Constants are semigroup fixed points: u(t) = 0.25 t exactly.
    CHECK(path.states.back()[5] ==
          doctest::Approx(0.25 * cfg.horizon()).epsilon(1e-13));
}

TEST_CASE("semigroup turns a point mass into the periodized heat kernel") {
    auto cfg = base_config();
    cfg.grid = GridSpec{1, 128, 16.0};
    cfg.x_obs = 64;
    Field delta(cfg.grid.sites(), 0.0);
    delta[cfg.x_obs] = 1.0 / cfg.grid.cell();
    const double t = 0.05;
    const Field spread = solver::heat_semigroup(delta, t, cfg.grid);
    for (std::size_t j = 0; j < spread.size(); j += 7) {
        double x = (static_cast<double>(j) - static_cast<double>(cfg.x_obs)) * cfg.grid.h();
        double per = 0.0;
        for (int im = -1; im <= 1; ++im)
            per += kernel::gamma(t, (x + im * cfg.grid.L) * (x + im * cfg.grid.L), 1);
        CHECK(spread[j] == doctest::Approx(per).epsilon(1e-8));
    }
    CHECK(solver::heat_semigroup_at(delta, t, cfg.grid, cfg.x_obs) ==
          doctest::Approx(kernel::gamma(t, 0.0, 1)).epsilon(1e-8));
    // tau = 0 is the identity.
    CHECK(solver::heat_semigroup(delta, 0.0, cfg.grid) == delta);
}

TEST_CASE("gamma table rows integrate to one") {
    auto cfg = base_config();
    cfg.steps = 50;
    const auto gamma = solver::build_gamma_table(cfg, 0);
    REQUIRE(gamma.rows.size() == 50);
    for (const auto& row : {gamma.rows.front(), gamma.rows.back()}) {
        double mass = 0.0;
        for (double v : row) mass += v * cfg.grid.cell();
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("additive variance approaches phi") {
    SolverConfig cfg;
    cfg.grid = GridSpec{1, 128, 12.0};
    cfg.coeffs = coeffs::linear();
    cfg.dt = 5e-4;
    cfg.steps = 500;  // t = 0.25
    cfg.x_obs = 64;
    cfg.seed = 3;

    const std::size_t m = 20000;
    std::vector<double> vals(m);
    for (std::size_t i = 0; i < m; ++i)
        vals[i] = solver::observe_path(cfg, static_cast<std::uint32_t>(i));
    const auto s = stats::summarize(vals);

    // Exact variance of the scheme: each increment k is propagated by
    // steps - k semigroup applications, so the mode at xi contributes the
    // geometric sum dt e^{-2 dt xi^2} (1 - q^steps)/(1 - q), q = e^{-2 dt xi^2}.
    const auto w = spectral::spectral_weights(cfg.measure, cfg.grid);
    double var_disc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double xi_sq = fft::xi_norm_sq_half(cfg.grid, k);
        const double q = std::exp(-2.0 * cfg.dt * xi_sq);
        const double series =
            xi_sq == 0.0 ? static_cast<double>(cfg.steps)
                         : q * (1.0 - std::pow(q, cfg.steps)) / (1.0 - q);
        var_disc += fft::multiplicity_half(cfg.grid, k) * w[k] * cfg.dt * series;
    }
    // Pure sampling error against the exact value; rel se = sqrt(2/m) = 1%.
    CHECK(std::abs(s.var - var_disc) / var_disc < 0.05);
    // Against the continuum functional the Riemann-sum and spectral-cutoff
    // deficits enter (a few percent at this grid).
    const double phi = kernel::PhiEvaluator(cfg.measure).phi(cfg.horizon());
    CHECK(std::abs(s.var - phi) / phi < 0.08);
    CHECK(s.var < phi);  // both deficits point down
    CHECK(std::abs(s.mean) < 5.0 * s.stderr_);
}

TEST_CASE("observation shortcut matches the stepped path") {
    for (auto coeff : {coeffs::linear(), coeffs::sine_diffusion(), coeffs::drift()}) {
        auto cfg = base_config();
        cfg.coeffs = coeff;
        cfg.steps = 60;
        const auto path = solver::simulate_path(cfg, 4);
        REQUIRE(path.ok);
        bool ok = false;
        const double v = solver::observe_path(cfg, 4, &ok);
        CHECK(ok);
        CHECK(v == doctest::Approx(path.states.back()[cfg.x_obs]).epsilon(1e-10));
    }
}

TEST_CASE("mild accumulation telescopes to the stepped observation") {
    auto cfg = base_config();
    cfg.coeffs = coeffs::drift();
    cfg.steps = 64;
    cfg.u0.assign(cfg.grid.sites(), 0.3);  // nonzero start exercises f0
    const auto gamma = solver::build_gamma_table(cfg, 0);
    const auto fn = solver::simulate_fn_sequence(cfg, 2, {0, 16, 32, 48, 64}, gamma);
    REQUIRE(fn.ok);
    CHECK(fn.fn.back() == doctest::Approx(fn.u_obs).epsilon(1e-10));
    CHECK(fn.f0 == doctest::Approx(0.3).epsilon(1e-12));  // constants stay put
    // Partial sums are nondecreasing in information, not value; just check size.
    CHECK(fn.fn.size() == 5);
}

TEST_CASE("truncated field propagates the stored state") {
    auto cfg = base_config();
    cfg.coeffs = coeffs::sine_diffusion();
    cfg.steps = 40;
    const auto path = solver::simulate_path(cfg, 1);
    REQUIRE(path.ok);
    const Field same = solver::truncated_field(path, cfg, 25, 25);
    CHECK(same == path.states[25]);
    const Field later = solver::truncated_field(path, cfg, 25, 40);
    const Field direct = solver::heat_semigroup(path.states[25], 15 * cfg.dt, cfg.grid);
    for (std::size_t j = 0; j < later.size(); ++j)
        CHECK(later[j] == doctest::Approx(direct[j]).epsilon(1e-12));
}

TEST_CASE("difference moments vanish at zero width and grow with it") {
    auto cfg = base_config();
    cfg.coeffs = coeffs::sine_diffusion();
    cfg.steps = 80;
    const auto zero = solver::difference_moments(cfg, 40, 40, 2, 50, 1);
    CHECK(zero.value < 1e-26);
    const auto narrow = solver::difference_moments(cfg, 40, 50, 2, 400, 1);
    const auto wide = solver::difference_moments(cfg, 40, 80, 2, 400, 1);
    CHECK(narrow.value > 0.0);
    CHECK(wide.value > narrow.value);
    CHECK(wide.paths == 400);
    CHECK(wide.failures == 0);
}

TEST_CASE("coarse and refined stepping stay close under shared noise") {
    // Sum consecutive fine increments into one coarse increment and compare
    // end states; catches mis-addressed noise and broken semigroup scaling.
    auto cfg = base_config();
    cfg.coeffs = coeffs::sine_diffusion();
    cfg.dt = 5e-4;
    cfg.steps = 256;

    const auto fine = solver::simulate_path(cfg, 9);
    REQUIRE(fine.ok);

    auto coarse_cfg = cfg;
    coarse_cfg.dt = 2.0 * cfg.dt;
    coarse_cfg.steps = cfg.steps / 2;
    const auto mult = solver::step_multiplier(coarse_cfg.grid, coarse_cfg.dt);
    Field u(cfg.grid.sites(), 0.0);
    Field dW(cfg.grid.sites());
    for (int k = 0; k < coarse_cfg.steps; ++k) {
        for (std::size_t j = 0; j < dW.size(); ++j)
            dW[j] = fine.increments[2 * k][j] + fine.increments[2 * k + 1][j];
        REQUIRE(solver::step(u, dW, coarse_cfg, mult));
    }
    const double uf = fine.states.back()[cfg.x_obs];
    const double uc = u[cfg.x_obs];
    CHECK(uc != uf);
    CHECK(std::abs(uc - uf) < 0.05 * (1.0 + std::abs(uf)));
}

TEST_CASE("instability is detected and flagged") {
    auto cfg = base_config();
    cfg.coeffs = no_noise();
    cfg.coeffs.b = &explode;
    cfg.dt = 1.0;  // forcing alone overflows within a few steps
    cfg.steps = 20;
    cfg.u0.assign(cfg.grid.sites(), 1.0);
    const auto path = solver::simulate_path(cfg, 0);
    CHECK_FALSE(path.ok);
    CHECK(path.failed_step >= 0);
    const auto st = solver::run_path(cfg, 0);
    CHECK_FALSE(st.ok);
}
