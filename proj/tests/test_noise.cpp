#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "shen/fft.hpp"
#include "shen/noise.hpp"
#include "shen/spectral.hpp"

using namespace shen;
using spectral::SpectralMeasure;

namespace {

constexpr double kPi = 3.14159265358979323846;

// E[ (sum phi dW h^d)^2 ] = dt ||phi||_H^2, averaged over steps of one path.
double isometry_ratio(const SpectralMeasure& m, const GridSpec& g, int steps) {
    const double dt = 1e-3;
    const noise::Synth synth(g, m, dt);
    Field phi(g.sites());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double x = static_cast<double>(j) * g.h();
        phi[j] = std::sin(2.0 * kPi * x / g.L) + 0.5 * std::cos(4.0 * kPi * x / g.L);
    }
    const double target = dt * spectral::h_norm_sq(phi, g, m);
    Field dW(g.sites());
    double acc = 0.0;
    for (int k = 0; k < steps; ++k) {
        synth.sample(99, 0, static_cast<std::uint32_t>(k), dW);
        double s = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * dW[j];
        s *= g.cell();
        acc += s * s;
    }
    return acc / steps / target;
}

}  // namespace

TEST_CASE("white increments have site variance dt/h^d") {
    const GridSpec g{1, 64, 8.0};
    const double dt = 2e-3;
    const noise::Synth synth(g, SpectralMeasure::white(1), dt);
    Field dW(g.sites());
    double acc = 0.0;
    const int steps = 2000;
    for (int k = 0; k < steps; ++k) {
        synth.sample(5, 0, static_cast<std::uint32_t>(k), dW);
        for (double v : dW) acc += v * v;
    }
    const double var = acc / (steps * static_cast<double>(g.sites()));
    CHECK(var == doctest::Approx(dt / g.h()).epsilon(0.02));
}

TEST_CASE("pairing against a test function satisfies the isometry") {
    CHECK(isometry_ratio(SpectralMeasure::white(1), {1, 64, 8.0}, 20000) ==
          doctest::Approx(1.0).epsilon(0.05));
    CHECK(isometry_ratio(SpectralMeasure::riesz(0.5, 1), {1, 64, 8.0}, 20000) ==
          doctest::Approx(1.0).epsilon(0.05));
    CHECK(isometry_ratio(SpectralMeasure::exponential_cov(1.0), {1, 64, 8.0}, 20000) ==
          doctest::Approx(1.0).epsilon(0.05));
    CHECK(isometry_ratio(SpectralMeasure::white(2), {2, 16, 8.0}, 20000) ==
          doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("exponential covariance matches its lag structure") {
    const GridSpec g{1, 64, 16.0};
    const double dt = 1.0, scale = 2.0;
    const auto m = SpectralMeasure::exponential_cov(scale);
    const noise::Synth synth(g, m, dt);

    // Discrete target: sum over the half spectrum of mult * w * cos(xi lag).
    const auto w = synth.weights();
    auto target = [&](double lag) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
            s += fft::multiplicity_half(g, k) * w[k] *
                 std::cos(std::sqrt(fft::xi_norm_sq_half(g, k)) * lag);
        return s;
    };
    // The discrete spectrum reproduces the periodized covariance e^{-|x|/s}
    // up to the tail beyond the Nyquist frequency.
    for (double lag : {0.0, 0.25, 1.0, 2.0, 4.0}) {
        double per = 0.0;
        for (int im = -2; im <= 2; ++im) per += std::exp(-std::abs(lag + im * g.L) / scale);
        CHECK(target(lag) == doctest::Approx(per).epsilon(0.03));
    }

    // Empirical covariance against the discrete target, two anchors.
    const int steps = 20000;
    Field dW(g.sites());
    std::vector<std::size_t> lags{0, 1, 4, 8, 16};
    std::vector<double> cov_a(lags.size(), 0.0), cov_b(lags.size(), 0.0);
    const std::size_t xa = 0, xb = 24;
    for (int k = 0; k < steps; ++k) {
        synth.sample(7, 0, static_cast<std::uint32_t>(k), dW);
        for (std::size_t i = 0; i < lags.size(); ++i) {
            cov_a[i] += dW[xa] * dW[(xa + lags[i]) % g.sites()];
            cov_b[i] += dW[xb] * dW[(xb + lags[i]) % g.sites()];
        }
    }
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double expected = target(static_cast<double>(lags[i]) * g.h());
        CHECK(std::abs(cov_a[i] / steps - expected) < 0.035);
        // Stationarity: the anchor does not matter.
        CHECK(std::abs(cov_b[i] / steps - cov_a[i] / steps) < 0.04);
    }
}

TEST_CASE("increments are independent across steps") {
    const GridSpec g{1, 64, 8.0};
    const noise::Synth synth(g, SpectralMeasure::white(1), 1.0);
    Field a(g.sites()), b(g.sites());
    double dot = 0.0, var = 0.0;
    const int steps = 5000;
    for (int k = 0; k < steps; ++k) {
        synth.sample(11, 0, static_cast<std::uint32_t>(2 * k), a);
        synth.sample(11, 0, static_cast<std::uint32_t>(2 * k + 1), b);
        for (std::size_t j = 0; j < a.size(); ++j) {
            dot += a[j] * b[j];
            var += a[j] * a[j];
        }
    }
    CHECK(std::abs(dot / var) < 0.02);
}

TEST_CASE("sampling is deterministic in the address") {
    const GridSpec g{1, 32, 4.0};
    const noise::Synth synth(g, SpectralMeasure::riesz(0.5, 1), 1e-3);
    Field a(g.sites()), b(g.sites());
    synth.sample(42, 3, 17, a);
    synth.sample(42, 3, 17, b);
    CHECK(a == b);
    synth.sample(42, 4, 17, b);
    CHECK(a != b);

    const auto path = noise::make_path(synth, 42, 3, 32);
    CHECK(path.increment(17) == a);
}

TEST_CASE("field dump round-trips") {
    const GridSpec g{1, 32, 4.0};
    Field f(g.sites());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::sin(0.1 * static_cast<double>(j));
    const std::string file = "noise-dump-test.bin";
    noise::write_field_dump(file, g, 2.5e-3, 7, f);
    GridSpec g2;
    double dt = 0.0;
    std::uint32_t step = 0;
    const Field back = noise::read_field_dump(file, &g2, &dt, &step);
    CHECK(g2 == g);
    CHECK(dt == 2.5e-3);
    CHECK(step == 7);
    CHECK(back == f);
    std::remove(file.c_str());

    CHECK_THROWS(noise::read_field_dump("missing-file.bin"));
}
