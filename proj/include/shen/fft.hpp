#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "shen/grid.hpp"

namespace shen::fft {

// Half-spectrum (real-data) layout: d=1 kept as k in [0, n/2]; d=2 row-major
// n x (n/2+1) with the second axis truncated. Transforms follow the
// unnormalized convention: forward computes sum_j f_j e^{-2 pi i k.j/n},
// backward computes sum_k c_k e^{+2 pi i k.j/n}.
std::size_t spec_size(const GridSpec& grid);

// Frequency vector norm squared for a half-spectrum index.
double xi_norm_sq_half(const GridSpec& grid, std::size_t flat);

// Number of full-spectrum sites a half-spectrum entry stands for (1 or 2).
int multiplicity_half(const GridSpec& grid, std::size_t flat);

void forward_r2c(const GridSpec& grid, const double* in, std::complex<double>* out);

// Destroys the input spectrum.
void backward_c2r(const GridSpec& grid, std::complex<double>* in, double* out);

// Full complex in-place transforms (diagnostics and oracles).
void forward_c2c(const GridSpec& grid, std::complex<double>* data);
void backward_c2c(const GridSpec& grid, std::complex<double>* data);

}  // namespace shen::fft
