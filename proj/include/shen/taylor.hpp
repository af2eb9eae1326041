#pragma once

#include <cstdint>
#include <vector>

#include "shen/report.hpp"
#include "shen/solver.hpp"

namespace shen::taylor {

// Terms of the order-2 expansion of F_n - F_{n-1} over [t_{n-1}, t_n), with
// ubar(s) the heat-propagated time-t_{n-1} state (no noise, no drift):
//   j1       = sum_k <gamma_k, sigma(ubar_k) dW_k> h^d
//   j2       = sum_k <gamma_k, b(ubar_k)> h^d dt
//   r1_stoch = sum_k <gamma_k, (sigma(u_k) - sigma(ubar_k)) dW_k> h^d
//   r1_drift = sum_k <gamma_k, b(u_k)> h^d dt            (= j2 + r2_drift)
//   r2_drift = sum_k <gamma_k, (b(u_k) - b(ubar_k))> h^d dt
// The sigma difference is evaluated through the divided difference
// (sigma(u) - sigma(ubar)) / (u - ubar), with fallback sigma'(ubar) when
// |u - ubar| < 1e-12, so fn_diff = j1 + j2 + r1_stoch + r2_drift holds as an
// algebraic identity up to roundoff.
struct Terms {
    double j1 = 0.0;
    double j2 = 0.0;
    double r1_stoch = 0.0;
    double r1_drift = 0.0;
    double r2_drift = 0.0;
    double fn_diff = 0.0;            // F_n - F_{n-1} accumulated directly
    double identity_residual = 0.0;  // |fn_diff - (j1 + j2 + r1_stoch + r2_drift)|
};

enum class TermKind { J1, J2, R1Stoch, R1Drift, R2Drift };
const char* term_name(TermKind kind);
double term_value(const Terms& t, TermKind kind);

// Partition of [0, T] by step indices with the interval variances
// Delta_n(g) = phi(T - t_{n-1}) - phi(T - t_n).
struct PartitionPlan {
    std::vector<int> points;      // nondecreasing, first 0, last steps
    std::vector<double> delta_g;  // one per interval
    double horizon = 0.0;
};
PartitionPlan make_partition(const solver::SolverConfig& cfg, const std::vector<int>& points);
double delta_g(const PartitionPlan& plan, std::size_t interval);

Terms compute_terms(const solver::SolutionPath& path, const solver::SolverConfig& cfg,
                    const solver::GammaTable& gamma, int a_step, int b_step);
Terms compute_terms(const solver::SolutionPath& path, const PartitionPlan& plan,
                    std::size_t interval, const solver::SolverConfig& cfg,
                    const solver::GammaTable& gamma);

// Moment scalings over a family of final intervals [steps - w, steps):
// per width, (E|term|^p)^{1/p} for every term kind, fitted log-log against
// Delta_n(g). Widths share paths (common random numbers across widths).
struct ScalingSet {
    report::ScalingReport j1, j2, r1_stoch, r1_drift, r2_drift;
    double max_identity_residual = 0.0;
    std::size_t failures = 0;

    const report::ScalingReport& by_kind(TermKind kind) const;
};
ScalingSet scaling_experiment(const solver::SolverConfig& cfg,
                              const std::vector<int>& width_steps, int p, std::size_t paths,
                              int threads);

}  // namespace shen::taylor
