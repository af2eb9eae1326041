#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "shen/grid.hpp"
#include "shen/spectral.hpp"

namespace shen::noise {

// Sampler for one space-time increment field dW_k on the periodic grid.
// Spectral synthesis: W_hat(xi_k) = sqrt(dt w_k) eta_k with Hermitian
// symmetric complex Gaussians (zero and Nyquist modes real), followed by an
// unnormalized backward transform. A white measure draws sites directly,
// which realizes the same law (independent Normal(0, dt/h^d) values).
class Synth {
  public:
    Synth(const GridSpec& grid, const spectral::SpectralMeasure& measure, double dt);

    void sample(std::uint64_t seed, std::uint32_t path, std::uint32_t step, Field& out) const;

    const GridSpec& grid() const { return grid_; }
    const spectral::SpectralMeasure& measure() const { return measure_; }
    double dt() const { return dt_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    GridSpec grid_;
    spectral::SpectralMeasure measure_;
    double dt_ = 0.0;
    bool white_direct_ = false;
    double site_sd_ = 0.0;          // sqrt(dt/h^d) for the white fast path
    std::vector<double> amp_;       // sqrt(dt w_k) on the half spectrum
    std::vector<double> weights_;   // spectral weights w_k
};

// Lazily regenerable increment stream of one path.
struct NoisePath {
    const Synth* synth = nullptr;
    std::uint64_t seed = 0;
    std::uint32_t path_index = 0;
    int steps = 0;

    Field increment(int step) const;
    void increment(int step, Field& out) const;
};

NoisePath make_path(const Synth& synth, std::uint64_t seed, std::uint32_t path_index,
                    int steps);

// Binary field dump: magic "SHEN1", then u32 dim, u32 n, f64 L, f64 dt,
// u32 step, payload n^d little-endian doubles in row-major order.
void write_field_dump(const std::string& file, const GridSpec& grid, double dt,
                      std::uint32_t step, const Field& field);
Field read_field_dump(const std::string& file, GridSpec* grid = nullptr, double* dt = nullptr,
                      std::uint32_t* step = nullptr);

}  // namespace shen::noise
