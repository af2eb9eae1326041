#pragma once

#include <cstddef>
#include <vector>

#include "shen/solver.hpp"

namespace shen::density {

// Ensemble of u(T, x_obs); refuses when more than 0.1% of paths go unstable.
std::vector<double> collect_samples(const solver::SolverConfig& cfg, std::size_t paths,
                                    int threads);

// Evaluation grid centered on the sample mean, spanning span_sds standard
// deviations each side.
std::vector<double> make_grid(const std::vector<double>& samples, double span_sds,
                              std::size_t points);

// Gaussian-kernel density estimate, Silverman bandwidth 1.06 std M^{-1/5}.
// The reliable range is the contiguous run around the mode where the
// pointwise relative standard error stays below 20%.
struct Kde {
    std::vector<double> y;
    std::vector<double> p;
    std::vector<double> se;
    double bandwidth = 0.0;
    std::size_t samples = 0;
    double integral = 0.0;       // trapezoid mass over the grid
    std::size_t lo = 0, hi = 0;  // reliable index range [lo, hi)
    double y_lo = 0.0, y_hi = 0.0;

    bool reliable(std::size_t i) const { return i >= lo && i < hi; }
};
Kde kde(const std::vector<double>& samples, const std::vector<double>& grid);

// Kolmogorov-Smirnov test of the ensemble against Normal(F0, Phi(T));
// additive-noise configurations are exactly Gaussian.
struct GaussianCheck {
    std::size_t paths = 0;
    double f0 = 0.0;
    double phi_t = 0.0;
    double sample_mean = 0.0;
    double sample_var = 0.0;
    double ks = 0.0;
    double threshold = 0.0;  // 1.63 / sqrt(M), asymptotic alpha = 0.01
    bool pass = false;
};
GaussianCheck gaussian_case_check(const solver::SolverConfig& cfg, std::size_t paths,
                                  int threads);

// Two-sided Gaussian envelope around the KDE, in the centered coordinate
// z = (y - F0) / sqrt(Phi):
//   lower: C1 exp(-z^2 / C2) <= q(z)
//   upper: q(z) <= c1 exp(-w^2 / c2), w = max(|z| - c3/sqrt(Phi), 0)
// with q = KDE * sqrt(Phi) and c3 pinned to sup|b| * T. The exponents come
// from least squares of log q against z^2 (resp. w^2) on the reliable range;
// the offsets are then the extreme feasible values, so each inequality is
// tight at one grid point.
struct EnvelopeFit {
    double C1 = 0.0, C2 = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double lower_rss = 0.0, upper_rss = 0.0;  // regression residuals
};

struct DensityReport {
    std::size_t samples = 0;
    double f0 = 0.0;
    double phi_t = 0.0;
    Kde density;
    EnvelopeFit fit;
    std::vector<double> lower_env;  // envelope values on the full grid
    std::vector<double> upper_env;
    bool lower_ok = false;  // lower envelope below KDE on the reliable range
    bool upper_ok = false;  // KDE below upper envelope on the reliable range
    bool order_ok = false;  // lower envelope never exceeds the upper one
    bool gap_ok = false;    // C2 <= 10 c2
    bool pass = false;
};
DensityReport envelope_check(const solver::SolverConfig& cfg, const std::vector<double>& samples,
                             std::size_t grid_points = 401, double span_sds = 6.0);

// Per-path quadratic variation and drift against their a.s. bounds
// sup|sigma|^2 Phi(T) and sup|b| T, with 2% discretization headroom.
struct PathBoundsReport {
    std::size_t paths = 0;
    std::size_t failures = 0;
    double phi_t = 0.0;
    double qv_limit = 0.0;
    double drift_limit = 0.0;
    double max_qv = 0.0;
    double max_drift = 0.0;  // max |drift|
    std::size_t qv_violations = 0;
    std::size_t drift_violations = 0;
    bool pass = false;
};
PathBoundsReport path_bounds_check(const solver::SolverConfig& cfg, std::size_t paths,
                                   int threads);

}  // namespace shen::density
