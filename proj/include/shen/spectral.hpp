#pragma once

#include <string>
#include <vector>

#include "shen/grid.hpp"

namespace shen::spectral {

enum class Family { WhiteNoise, Riesz, Bessel, ExponentialCov };

// Spatially homogeneous covariances described by a radial spectral density
// g(xi) under the convention  F phi(xi) = integral e^{-i<xi,x>} phi(x) dx,
// inverse transform carrying (2 pi)^{-d}.
//
//   WhiteNoise        g = (2 pi)^{-d}
//   Riesz(eta)        g = c_{d,eta} |xi|^{eta-d},   Lambda(x) = |x|^{-eta}
//   Bessel(order)     g = (2 pi)^{-d} (1+|xi|^2)^{-order}
//   ExponentialCov(s) g = (s/pi) / (1 + s^2 xi^2), Lambda(x) = e^{-|x|/s}, d=1
struct SpectralMeasure {
    Family family = Family::WhiteNoise;
    int dim = 1;
    double param = 0.0;  // eta | order | scale

    static SpectralMeasure white(int dim);
    static SpectralMeasure riesz(double eta, int dim);
    static SpectralMeasure bessel(double order, int dim);
    static SpectralMeasure exponential_cov(double scale);

    void validate() const;
    double density_radial(double r) const;
    double density(const std::array<double, 2>& xi) const;

    // Constant in the Riesz pair, derived from the convention above.
    static double riesz_constant(double eta, int dim);

    std::string name() const;
};

bool operator==(const SpectralMeasure& a, const SpectralMeasure& b);

// Surface area of the unit sphere in R^d (number of half-lines for d=1).
double sphere_surface(int dim);

// Discrete spectral weights w_k ~ g(xi_k) (2 pi / L)^d on the half spectrum
// layout of fft.hpp. The zero-frequency cell of a Riesz measure is assigned
// its exact cell integral, every other site uses the pointwise density.
// Weights are per full-spectrum site; apply fft::multiplicity_half in sums.
std::vector<double> spectral_weights(const SpectralMeasure& m, const GridSpec& grid);

// || phi ||_H^2 = sum_k |F phi(xi_k)|^2 w_k with F phi(xi_k) = h^d DFT_k[phi].
double h_norm_sq(const Field& phi, const GridSpec& grid, const SpectralMeasure& m);
double h_norm_sq_weighted(const Field& phi, const GridSpec& grid,
                          const std::vector<double>& weights);

struct DalangReport {
    std::vector<double> cutoffs;
    std::vector<double> values;      // integral up to each cutoff
    std::vector<double> increments;  // successive differences
    double ratio = 0.0;              // last increment ratio
    bool converges = false;
    double value = 0.0;  // integral at the largest cutoff
};

// Truncated integrals of g(xi)/(1+|xi|^2); geometric decay of the increments
// (ratio < 0.9) is reported as convergence.
DalangReport dalang_integral(const SpectralMeasure& m, const std::vector<double>& cutoffs);

}  // namespace shen::spectral
