#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "shen/coefficients.hpp"
#include "shen/grid.hpp"
#include "shen/noise.hpp"
#include "shen/spectral.hpp"

namespace shen::solver {

// Exponential Euler scheme for du = Lu + b(u) + sigma(u) dW on the periodic
// grid: u_{k+1} = S_dt(u_k + b(u_k) dt + sigma(u_k) dW_k), with the heat
// semigroup S applied as a Fourier multiplier.
struct SolverConfig {
    GridSpec grid;
    spectral::SpectralMeasure measure = spectral::SpectralMeasure::white(1);
    Coefficients coeffs = coeffs::linear();
    double dt = 1e-3;
    int steps = 100;
    Field u0;             // empty means identically zero
    std::size_t x_obs = 0;
    std::uint64_t seed = 1;

    double horizon() const { return dt * steps; }
    void validate() const;
};

// S_tau phi via multiplication by exp(-tau |xi|^2); tau = 0 is the identity.
Field heat_semigroup(const Field& phi, double tau, const GridSpec& grid);
double heat_semigroup_at(const Field& phi, double tau, const GridSpec& grid, std::size_t site);

// (S_t u0)(x_obs), the deterministic center of the solution.
double f0(const SolverConfig& cfg, double t);

// One exponential Euler update; returns false when the new state is not
// finite everywhere (the path must then be abandoned).
bool step(Field& u, const Field& dW, const SolverConfig& cfg,
          const std::vector<double>& semigroup_mult);

// exp(-dt |xi|^2)/n^d table used by step().
std::vector<double> step_multiplier(const GridSpec& grid, double dt);

struct SolutionPath {
    std::vector<Field> states;      // states[k] = u(t_k, .), k = 0..steps
    std::vector<Field> increments;  // increments[k] = dW_k, k = 0..steps-1
    bool ok = true;
    int failed_step = -1;
};

// Full-storage path from step first_stored on (earlier states are dropped;
// states[k] for k < first_stored stay empty).
SolutionPath simulate_path(const SolverConfig& cfg, std::uint32_t path_index,
                           int first_stored = 0);

// Rows gamma_k(y) = Gamma_per(t - t_k, x_obs - y) = (S_{t - t_k} delta_{x_obs}/h^d)(y)
// for k = 0..steps-1, evaluated with the same spectral multiplier as the
// scheme so that mild-form accumulations telescope exactly.
struct GammaTable {
    GridSpec grid;
    std::vector<Field> rows;
    int first = 0;  // rows[k - first] corresponds to step k
};
GammaTable build_gamma_table(const SolverConfig& cfg, int first = 0);

// Streaming single-path run; optionally accumulates the quadratic variation
// sum_k dt |gamma_k sigma(u_k)|_H^2 and the drift sum_k <gamma_k, b(u_k)> h^d dt.
struct PathStats {
    double u_obs = 0.0;
    double sup_abs = 0.0;
    double qv = 0.0;
    double drift = 0.0;
    bool ok = true;
};
PathStats run_path(const SolverConfig& cfg, std::uint32_t path_index,
                   const GammaTable* gamma = nullptr);

// u(T, x_obs) alone, without per-step statistics. Additive configurations
// (sigma = 1, b = 0) accumulate the recursion in the spectral domain -- one
// forward transform per step and a single backward transform at the end --
// which agrees with the stepped path to roundoff.
double observe_path(const SolverConfig& cfg, std::uint32_t path_index, bool* ok = nullptr);

// Mild-form partial accumulations F_n at the partition's step indices:
// F_n = F_0 + sum_{k < p_n} ( <gamma_k, sigma(u_k) dW_k> h^d + <gamma_k, b(u_k)> h^d dt ).
struct FnSequence {
    double f0 = 0.0;
    std::vector<double> fn;  // one value per partition point
    double u_obs = 0.0;      // u(t, x_obs) from the stepped state
    bool ok = true;
};
FnSequence simulate_fn_sequence(const SolverConfig& cfg, std::uint32_t path_index,
                                const std::vector<int>& partition, const GammaTable& gamma);

// Truncated field u_{n-1}(s, .) = S_{(s-a) dt}(u(t_a, .)).
Field truncated_field(const SolutionPath& path, const SolverConfig& cfg, int a_step,
                      int s_step);

// Monte Carlo moments of u(s, x_obs) - u_{n-1}(s, x_obs).
struct MomentEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t paths = 0;
    std::size_t failures = 0;
};
MomentEstimate difference_moments(const SolverConfig& cfg, int a_step, int s_step, int p,
                                  std::size_t paths, int threads);

}  // namespace shen::solver
