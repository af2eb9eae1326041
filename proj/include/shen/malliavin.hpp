#pragma once

#include <cstdint>
#include <vector>

#include "shen/report.hpp"
#include "shen/solver.hpp"

namespace shen::malliavin {

// First Malliavin derivative of u(T, x_obs), observed through its source
// slices: slices[r - first](z) = D_{r,z} u(T, x_obs). Slices at or after the
// observation step are identically zero (adaptedness).
struct DerivativeField {
    GridSpec grid;
    double dt = 0.0;
    int first = 0;
    int obs_step = 0;
    std::vector<Field> slices;  // one per source step r in [first, obs_step)

    const Field& slice(int r) const;  // zero field outside [first, obs_step)
};

// The linearized scheme D_{k+1} = S_dt((1 + b'(u_k) dt + sigma'(u_k) dW_k) D_k)
// seeded at step r by the kick sigma(u(t_r, z)) delta_z / h^d, evaluated for
// every source (r, z) at once by propagating the adjoint state of x_obs
// backwards: one semigroup multiplication per step regardless of sources.
// Requires path states and increments stored from step `first` on.
DerivativeField propagate_derivative(const solver::SolutionPath& path,
                                     const solver::SolverConfig& cfg, int first = 0);

// Forward single-source propagation (reference path for cross-checks):
// returns the full field D_{r,z} u(T, .).
Field forward_source_field(const solver::SolutionPath& path, const solver::SolverConfig& cfg,
                           int r, std::size_t z);

// || D u(T, x_obs) ||^2 over the window of source steps [a_step, e_step):
// sum of dt * ||D_{r,.}||_H^2.
double ht_norm_sq(const DerivativeField& d, const spectral::SpectralMeasure& measure,
                  int a_step, int e_step);

// Monte Carlo estimates of E ||Du(T, x_obs)||^{2p} over trailing windows of
// the given step counts, fitted log-log against Phi(delta). Expected slope p.
report::ScalingReport lemma4_scaling(const solver::SolverConfig& cfg,
                                     const std::vector<int>& delta_steps, int p,
                                     std::size_t paths, int threads);

// X = Delta_n(g)^{-1} * sum_{r in [a,e)} dt ||D_r F_n||_H^2 with F_n the mild
// accumulation up to step e_step and Delta_n(g) = phi(T - t_a) - phi(T - t_e).
struct NegativeMomentReport {
    int a_step = 0;
    int e_step = 0;
    int p = 1;
    double delta_g = 0.0;
    std::size_t paths = 0;         // total sampled (twice the base count)
    double neg_moment = 0.0;       // E[X^{-p}] over all paths
    double neg_moment_half = 0.0;  // over the first half
    bool stable = false;           // doubling changed the estimate by < 10%
    double median_x = 0.0;
    std::vector<double> eps;        // {1, 1/2, 1/4, 1/8} * median
    std::vector<double> tail_prob;  // P(X < eps)
    bool decay_pass = false;        // >= 4x decay per halving (zeros pass)
    std::vector<double> samples;    // X per path
};

NegativeMomentReport negative_moment_probe(const solver::SolverConfig& cfg, int a_step,
                                           int e_step, int p, std::size_t base_paths,
                                           int threads);

}  // namespace shen::malliavin
