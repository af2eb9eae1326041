#include "shen/noise.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "shen/fft.hpp"
#include "shen/rng.hpp"

namespace shen::noise {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;

thread_local std::vector<std::complex<double>> tl_spec;
}  // namespace

Synth::Synth(const GridSpec& grid, const spectral::SpectralMeasure& measure, double dt)
    : grid_(grid), measure_(measure), dt_(dt) {
    grid_.validate();
    measure_.validate();
    if (measure_.dim != grid_.dim) throw std::invalid_argument("noise: dim mismatch");
    if (!(dt_ > 0.0)) throw std::invalid_argument("noise: dt must be positive");
    weights_ = spectral::spectral_weights(measure_, grid_);
    white_direct_ = measure_.family == spectral::Family::WhiteNoise;
    site_sd_ = std::sqrt(dt_ / grid_.cell());
    amp_.resize(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) amp_[k] = std::sqrt(dt_ * weights_[k]);
}

void Synth::sample(std::uint64_t seed, std::uint32_t path, std::uint32_t step,
                   Field& out) const {
    const std::size_t sites = grid_.sites();
    out.resize(sites);

    if (white_direct_) {
        for (std::size_t j = 0; j < sites; j += 2) {
            const auto z = rng::normal_pair(seed, path, step, static_cast<std::uint32_t>(j / 2));
            out[j] = site_sd_ * z[0];
            if (j + 1 < sites) out[j + 1] = site_sd_ * z[1];
        }
        return;
    }

    auto& spec = tl_spec;
    spec.assign(fft::spec_size(grid_), {0.0, 0.0});
    const int n = grid_.n;
    const int nh = n / 2;

    if (grid_.dim == 1) {
        for (int k = 0; k <= nh; ++k) {
            const auto z = rng::normal_pair(seed, path, step, static_cast<std::uint32_t>(k));
            if (k == 0 || k == nh)
                spec[k] = {amp_[k] * z[0], 0.0};
            else
                spec[k] = {amp_[k] * z[0] * kInvSqrt2, amp_[k] * z[1] * kInvSqrt2};
        }
    } else {
        const int hn = nh + 1;
        auto at = [&](int k1, int k2) -> std::complex<double>& {
            return spec[static_cast<std::size_t>(k1) * hn + k2];
        };
        for (int k1 = 0; k1 < n; ++k1) {
            for (int k2 = 0; k2 <= nh; ++k2) {
                const std::size_t flat = static_cast<std::size_t>(k1) * hn + k2;
                const double a = amp_[flat];
                const bool sym_col = (k2 == 0 || k2 == nh);
                if (!sym_col) {
                    const auto z = rng::normal_pair(seed, path, step,
                                                    static_cast<std::uint32_t>(flat));
                    at(k1, k2) = {a * z[0] * kInvSqrt2, a * z[1] * kInvSqrt2};
                    continue;
                }
                // Hermitian along k1 within this column.
                if (k1 == 0 || k1 == nh) {
                    const auto z = rng::normal_pair(seed, path, step,
                                                    static_cast<std::uint32_t>(flat));
                    at(k1, k2) = {a * z[0], 0.0};
                } else if (k1 < nh) {
                    const auto z = rng::normal_pair(seed, path, step,
                                                    static_cast<std::uint32_t>(flat));
                    at(k1, k2) = {a * z[0] * kInvSqrt2, a * z[1] * kInvSqrt2};
                    at(n - k1, k2) = std::conj(at(k1, k2));
                }
            }
        }
    }
    fft::backward_c2r(grid_, spec.data(), out.data());
}

Field NoisePath::increment(int step) const {
    Field f;
    increment(step, f);
    return f;
}

void NoisePath::increment(int step, Field& out) const {
    if (step < 0 || step >= steps) throw std::out_of_range("noise: step out of range");
    synth->sample(seed, path_index, static_cast<std::uint32_t>(step), out);
}

NoisePath make_path(const Synth& synth, std::uint64_t seed, std::uint32_t path_index,
                    int steps) {
    if (steps <= 0) throw std::invalid_argument("noise: steps must be positive");
    return NoisePath{&synth, seed, path_index, steps};
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_field_dump(const std::string& file, const GridSpec& grid, double dt,
                      std::uint32_t step, const Field& field) {
    if (field.size() != grid.sites()) throw std::invalid_argument("dump: field size mismatch");
    File f(std::fopen(file.c_str(), "wb"));
    if (!f) throw std::runtime_error("dump: cannot open " + file);
    const char magic[5] = {'S', 'H', 'E', 'N', '1'};
    const std::uint32_t dim = static_cast<std::uint32_t>(grid.dim);
    const std::uint32_t n = static_cast<std::uint32_t>(grid.n);
    std::fwrite(magic, 1, 5, f.get());
    std::fwrite(&dim, sizeof dim, 1, f.get());
    std::fwrite(&n, sizeof n, 1, f.get());
    std::fwrite(&grid.L, sizeof grid.L, 1, f.get());
    std::fwrite(&dt, sizeof dt, 1, f.get());
    std::fwrite(&step, sizeof step, 1, f.get());
    if (std::fwrite(field.data(), sizeof(double), field.size(), f.get()) != field.size())
        throw std::runtime_error("dump: short write to " + file);
}

Field read_field_dump(const std::string& file, GridSpec* grid, double* dt,
                      std::uint32_t* step) {
    File f(std::fopen(file.c_str(), "rb"));
    if (!f) throw std::runtime_error("dump: cannot open " + file);
    char magic[5];
    std::uint32_t dim = 0, n = 0, stp = 0;
    double L = 0.0, dt_local = 0.0;
    if (std::fread(magic, 1, 5, f.get()) != 5 || std::memcmp(magic, "SHEN1", 5) != 0)
        throw std::runtime_error("dump: bad magic in " + file);
    if (std::fread(&dim, sizeof dim, 1, f.get()) != 1 ||
        std::fread(&n, sizeof n, 1, f.get()) != 1 ||
        std::fread(&L, sizeof L, 1, f.get()) != 1 ||
        std::fread(&dt_local, sizeof dt_local, 1, f.get()) != 1 ||
        std::fread(&stp, sizeof stp, 1, f.get()) != 1)
        throw std::runtime_error("dump: truncated header in " + file);
    GridSpec g(static_cast<int>(dim), static_cast<int>(n), L);
    Field out(g.sites());
    if (std::fread(out.data(), sizeof(double), out.size(), f.get()) != out.size())
        throw std::runtime_error("dump: short read from " + file);
    if (grid) *grid = g;
    if (dt) *dt = dt_local;
    if (step) *step = stp;
    return out;
}

}  // namespace shen::noise
