#include <cmath>
#include <vector>

#include "doctest.h"
#include "shen/fft.hpp"
#include "shen/kernel.hpp"
#include "shen/spectral.hpp"

using namespace shen;
using spectral::SpectralMeasure;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("riesz constant agrees with the reflection-formula form") {
    for (double eta : {0.2, 0.5, 0.8}) {
        const double c = SpectralMeasure::riesz_constant(eta, 1);
        const double via_reflection =
            std::tgamma(1.0 - eta) * std::sin(kPi * eta / 2.0) / kPi;
        CHECK(c == doctest::Approx(via_reflection).epsilon(1e-12));
    }
    CHECK(SpectralMeasure::riesz_constant(0.5, 1) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("family validation") {
    CHECK_THROWS(SpectralMeasure::riesz(0.0, 1).validate());
    CHECK_THROWS(SpectralMeasure::riesz(1.0, 1).validate());  // eta must be < d
    CHECK_NOTHROW(SpectralMeasure::riesz(1.5, 2).validate());
    CHECK_THROWS(SpectralMeasure::exponential_cov(-1.0).validate());
    CHECK_THROWS(SpectralMeasure::bessel(0.0, 1).validate());
    CHECK_NOTHROW(SpectralMeasure::white(2).validate());
}

TEST_CASE("sphere surface") {
    CHECK(spectral::sphere_surface(1) == doctest::Approx(2.0));
    CHECK(spectral::sphere_surface(2) == doctest::Approx(2.0 * kPi));
}

TEST_CASE("white weights are flat 1/L^d") {
    const GridSpec g{1, 32, 8.0};
    const auto w = spectral::spectral_weights(SpectralMeasure::white(1), g);
    REQUIRE(w.size() == fft::spec_size(g));
    for (double v : w) CHECK(v == doctest::Approx(1.0 / g.L).epsilon(1e-14));

    const GridSpec g2{2, 8, 4.0};
    const auto w2 = spectral::spectral_weights(SpectralMeasure::white(2), g2);
    for (double v : w2) CHECK(v == doctest::Approx(1.0 / (g2.L * g2.L)).epsilon(1e-14));
}

TEST_CASE("riesz zero-frequency weight is the exact cell integral") {
    const GridSpec g{1, 64, 16.0};
    const double eta = 0.5;
    const auto w = spectral::spectral_weights(SpectralMeasure::riesz(eta, 1), g);
    const double c = SpectralMeasure::riesz_constant(eta, 1);
    const double half_cell = kPi / g.L;
    // integral_{-pi/L}^{pi/L} c |xi|^{eta-1} dxi = 2 c (pi/L)^eta / eta
    CHECK(w[0] == doctest::Approx(2.0 * c * std::pow(half_cell, eta) / eta).epsilon(1e-12));
    // Interior sites carry the pointwise density times the cell volume.
    const double xi1 = 2.0 * kPi / g.L;
    CHECK(w[1] == doctest::Approx(c * std::pow(xi1, eta - 1.0) * xi1).epsilon(1e-12));
}

TEST_CASE("white H-norm is the L2 norm") {
    const GridSpec g{1, 64, 8.0};
    Field f(g.sites());
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = static_cast<double>(j) * g.h();
        f[j] = std::sin(2.0 * kPi * x / g.L) + 0.3 * std::cos(6.0 * kPi * x / g.L);
    }
    double l2 = 0.0;
    for (double v : f) l2 += v * v * g.h();
    CHECK(spectral::h_norm_sq(f, g, SpectralMeasure::white(1)) ==
          doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("weighted norm matches the measure norm") {
    const GridSpec g{1, 32, 8.0};
    const auto m = SpectralMeasure::riesz(0.5, 1);
    Field f(g.sites());
    for (std::size_t j = 0; j < f.size(); ++j)
        f[j] = std::exp(-std::pow(static_cast<double>(j) * g.h() - 4.0, 2));
    const auto w = spectral::spectral_weights(m, g);
    CHECK(spectral::h_norm_sq(f, g, m) ==
          doctest::Approx(spectral::h_norm_sq_weighted(f, g, w)).epsilon(1e-14));
}

TEST_CASE("heat kernel H-norm reproduces the rate J(t)") {
    // || Gamma(t, .) ||_H^2 = J(t) = (8 pi t)^{-1/2} for white noise, d=1.
    const GridSpec g{1, 256, 16.0};
    const double t = 0.1;
    Field gam(g.sites());
    for (std::size_t j = 0; j < g.sites(); ++j) {
        double x = static_cast<double>(j) * g.h();
        if (x > g.L / 2) x -= g.L;  // periodized; one image suffices at L = 16
        gam[j] = kernel::gamma(t, x * x, 1);
    }
    const double norm = spectral::h_norm_sq(gam, g, SpectralMeasure::white(1));
    CHECK(norm == doctest::Approx(1.0 / std::sqrt(8.0 * kPi * t)).epsilon(1e-6));
}

TEST_CASE("integrability diagnostic") {
    const std::vector<double> cutoffs{10.0, 100.0, 1000.0, 10000.0};

    auto white1 = spectral::dalang_integral(SpectralMeasure::white(1), cutoffs);
    CHECK(white1.converges);
    // integral (2 pi)^{-1} / (1 + xi^2) over R = 1/2.
    CHECK(white1.value == doctest::Approx(0.5).epsilon(1e-3));

    auto white2 = spectral::dalang_integral(SpectralMeasure::white(2), cutoffs);
    CHECK_FALSE(white2.converges);  // logarithmic growth

    auto riesz2 = spectral::dalang_integral(SpectralMeasure::riesz(1.0, 2), cutoffs);
    CHECK(riesz2.converges);

    auto bessel1 = spectral::dalang_integral(SpectralMeasure::bessel(1.0, 1), cutoffs);
    CHECK(bessel1.converges);

    auto expc = spectral::dalang_integral(SpectralMeasure::exponential_cov(1.0), cutoffs);
    CHECK(expc.converges);
    // integral (1/pi) / (1 + xi^2)^2 over R = 1/2.
    CHECK(expc.value == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("measure names are distinct and stable") {
    CHECK(SpectralMeasure::white(1).name() != SpectralMeasure::white(2).name());
    CHECK(SpectralMeasure::riesz(0.5, 1).name() != SpectralMeasure::riesz(0.7, 1).name());
}
