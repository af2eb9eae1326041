#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shen {

using Field = std::vector<double>;

// Periodic box [0,L)^d sampled with n points per axis, h = L/n.
struct GridSpec {
    int dim = 1;
    int n = 64;
    double L = 1.0;

    GridSpec() = default;
    GridSpec(int dim_, int n_, double L_) : dim(dim_), n(n_), L(L_) { validate(); }

    void validate() const {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("grid: dim must be 1 or 2");
        if (n < 2 || (n & (n - 1)) != 0)
            throw std::invalid_argument("grid: n must be a power of two >= 2");
        if (!(L > 0.0))
            throw std::invalid_argument("grid: L must be positive");
    }

    double h() const { return L / n; }
    std::size_t sites() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }
    double cell() const {
        double c = 1.0;
        for (int a = 0; a < dim; ++a) c *= h();
        return c;
    }

    // Row-major site coordinates.
    std::array<double, 2> coord(std::size_t flat) const {
        if (dim == 1) return {static_cast<double>(flat) * h(), 0.0};
        return {static_cast<double>(flat / n) * h(), static_cast<double>(flat % n) * h()};
    }
};

inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim == b.dim && a.n == b.n && a.L == b.L;
}

// Frequencies of the discrete Fourier basis on the grid: xi_k = 2*pi*k/L with
// k wrapped to the centered range [-n/2, n/2).
struct FrequencyGrid {
    GridSpec grid;

    explicit FrequencyGrid(const GridSpec& g) : grid(g) {}

    static int wrap(int k, int n) { return k < n / 2 ? k : k - n; }

    // Frequency vector for the flat full-spectrum index (row-major in d=2).
    std::array<double, 2> xi(std::size_t flat) const {
        const double step = 2.0 * 3.14159265358979323846 / grid.L;
        if (grid.dim == 1)
            return {step * wrap(static_cast<int>(flat), grid.n), 0.0};
        return {step * wrap(static_cast<int>(flat) / grid.n, grid.n),
                step * wrap(static_cast<int>(flat) % grid.n, grid.n)};
    }

    double xi_norm_sq(std::size_t flat) const {
        auto v = xi(flat);
        return v[0] * v[0] + v[1] * v[1];
    }

    // Volume of one frequency cell, (2*pi/L)^d.
    double cell() const {
        double step = 2.0 * 3.14159265358979323846 / grid.L;
        double c = 1.0;
        for (int a = 0; a < grid.dim; ++a) c *= step;
        return c;
    }
};

}  // namespace shen
