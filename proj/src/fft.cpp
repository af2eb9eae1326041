#include "shen/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace shen::fft {

namespace {

enum class Kind { R2C, C2R, C2C_F, C2C_B };

std::mutex plan_mutex;
std::map<std::tuple<int, int, Kind>, fftw_plan> plan_cache;

fftw_plan plan_for(const GridSpec& grid, Kind kind) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    const auto key = std::make_tuple(grid.dim, grid.n, kind);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    const int n = grid.n;
    const std::size_t sites = grid.sites();
    const std::size_t half = spec_size(grid);
    std::vector<double> re(sites);
    std::vector<std::complex<double>> sp(half);
    std::vector<std::complex<double>> full(sites);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

    fftw_plan p = nullptr;
    auto* spc = reinterpret_cast<fftw_complex*>(sp.data());
    auto* fullc = reinterpret_cast<fftw_complex*>(full.data());
    switch (kind) {
        case Kind::R2C:
            p = grid.dim == 1 ? fftw_plan_dft_r2c_1d(n, re.data(), spc, flags)
                              : fftw_plan_dft_r2c_2d(n, n, re.data(), spc, flags);
            break;
        case Kind::C2R:
            p = grid.dim == 1 ? fftw_plan_dft_c2r_1d(n, spc, re.data(), flags)
                              : fftw_plan_dft_c2r_2d(n, n, spc, re.data(), flags);
            break;
        case Kind::C2C_F:
            p = grid.dim == 1 ? fftw_plan_dft_1d(n, fullc, fullc, FFTW_FORWARD, flags)
                              : fftw_plan_dft_2d(n, n, fullc, fullc, FFTW_FORWARD, flags);
            break;
        case Kind::C2C_B:
            p = grid.dim == 1 ? fftw_plan_dft_1d(n, fullc, fullc, FFTW_BACKWARD, flags)
                              : fftw_plan_dft_2d(n, n, fullc, fullc, FFTW_BACKWARD, flags);
            break;
    }
    plan_cache.emplace(key, p);
    return p;
}

}  // namespace

std::size_t spec_size(const GridSpec& grid) {
    const std::size_t half = static_cast<std::size_t>(grid.n) / 2 + 1;
    return grid.dim == 1 ? half : static_cast<std::size_t>(grid.n) * half;
}

double xi_norm_sq_half(const GridSpec& grid, std::size_t flat) {
    const double step = 2.0 * 3.14159265358979323846 / grid.L;
    if (grid.dim == 1) {
        const double x = step * static_cast<double>(flat);
        return x * x;
    }
    const std::size_t half = static_cast<std::size_t>(grid.n) / 2 + 1;
    const int k1 = FrequencyGrid::wrap(static_cast<int>(flat / half), grid.n);
    const int k2 = static_cast<int>(flat % half);
    const double a = step * k1;
    const double b = step * k2;
    return a * a + b * b;
}

int multiplicity_half(const GridSpec& grid, std::size_t flat) {
    const int nh = grid.n / 2;
    if (grid.dim == 1) {
        const int k = static_cast<int>(flat);
        return (k == 0 || k == nh) ? 1 : 2;
    }
    const int k2 = static_cast<int>(flat % (static_cast<std::size_t>(nh) + 1));
    return (k2 == 0 || k2 == nh) ? 1 : 2;
}

void forward_r2c(const GridSpec& grid, const double* in, std::complex<double>* out) {
    fftw_plan p = plan_for(grid, Kind::R2C);
    fftw_execute_dft_r2c(p, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void backward_c2r(const GridSpec& grid, std::complex<double>* in, double* out) {
    fftw_plan p = plan_for(grid, Kind::C2R);
    fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in), out);
}

void forward_c2c(const GridSpec& grid, std::complex<double>* data) {
    fftw_plan p = plan_for(grid, Kind::C2C_F);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

void backward_c2c(const GridSpec& grid, std::complex<double>* data) {
    fftw_plan p = plan_for(grid, Kind::C2C_B);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

}  // namespace shen::fft
