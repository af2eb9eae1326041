#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "shen/fft.hpp"
#include "shen/rng.hpp"

using namespace shen;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field random_field(const GridSpec& g, std::uint64_t seed) {
    Field f(g.sites());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = rng::normal_pair(seed, 0, static_cast<std::uint32_t>(i), 0)[0];
    return f;
}
}  // namespace

TEST_CASE("r2c/c2r roundtrip recovers the field up to n^d") {
    for (GridSpec g : {GridSpec{1, 64, 4.0}, GridSpec{2, 16, 4.0}}) {
        const Field f = random_field(g, 11);
        std::vector<std::complex<double>> spec(fft::spec_size(g));
        fft::forward_r2c(g, f.data(), spec.data());
        Field back(g.sites());
        fft::backward_c2r(g, spec.data(), back.data());
        const double scale = static_cast<double>(g.sites());
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(back[i] / scale == doctest::Approx(f[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward transform of a plane wave is a delta") {
    const GridSpec g{1, 64, 8.0};
    const int mode = 5;
    Field f(g.sites());
    for (std::size_t j = 0; j < f.size(); ++j)
        f[j] = std::cos(2.0 * kPi * mode * static_cast<double>(j) / g.n);
    std::vector<std::complex<double>> spec(fft::spec_size(g));
    fft::forward_r2c(g, f.data(), spec.data());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double expected = (k == static_cast<std::size_t>(mode)) ? g.n / 2.0 : 0.0;
        CHECK(std::abs(spec[k].real() - expected) < 1e-9);
        CHECK(std::abs(spec[k].imag()) < 1e-9);
    }
}

TEST_CASE("half-spectrum frequencies and multiplicities") {
    const GridSpec g{1, 8, 2.0};
    // k = 0..4 kept; interior entries stand for +-k.
    CHECK(fft::spec_size(g) == 5);
    CHECK(fft::multiplicity_half(g, 0) == 1);
    CHECK(fft::multiplicity_half(g, 1) == 2);
    CHECK(fft::multiplicity_half(g, 3) == 2);
    CHECK(fft::multiplicity_half(g, 4) == 1);  // Nyquist
    const double step = 2.0 * kPi / g.L;
    CHECK(fft::xi_norm_sq_half(g, 2) == doctest::Approx(4.0 * step * step));

    const GridSpec g2{2, 8, 2.0};
    CHECK(fft::spec_size(g2) == 8u * 5u);
    // Full-spectrum site count is recovered by the multiplicities.
    std::size_t total = 0;
    for (std::size_t k = 0; k < fft::spec_size(g2); ++k)
        total += static_cast<std::size_t>(fft::multiplicity_half(g2, k));
    CHECK(total == g2.sites());
}

TEST_CASE("parseval on the half spectrum") {
    for (GridSpec g : {GridSpec{1, 32, 4.0}, GridSpec{2, 8, 4.0}}) {
        const Field f = random_field(g, 12);
        double direct = 0.0;
        for (double v : f) direct += v * v;
        std::vector<std::complex<double>> spec(fft::spec_size(g));
        fft::forward_r2c(g, f.data(), spec.data());
        double viaspec = 0.0;
        for (std::size_t k = 0; k < spec.size(); ++k)
            viaspec += fft::multiplicity_half(g, k) * std::norm(spec[k]);
        viaspec /= static_cast<double>(g.sites());
        CHECK(viaspec == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("c2c transforms invert each other") {
    const GridSpec g{1, 32, 4.0};
    std::vector<std::complex<double>> data(g.sites());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = rng::normal_pair(13, 0, static_cast<std::uint32_t>(i), 0);
        data[i] = {z[0], z[1]};
    }
    auto orig = data;
    fft::forward_c2c(g, data.data());
    fft::backward_c2c(g, data.data());
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(std::abs(data[i] / static_cast<double>(g.sites()) - orig[i]) < 1e-12);
}
