#include <cmath>

#include "doctest.h"
#include "shen/kernel.hpp"

using namespace shen;
using kernel::PhiEvaluator;
using kernel::Route;
using spectral::SpectralMeasure;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("heat kernel basics") {
    // Unit mass: Riemann sum of Gamma(t, .) over R.
    const double t = 0.05;
    double mass = 0.0;
    const double h = 0.01;
    for (double x = -3.0; x <= 3.0; x += h) mass += kernel::gamma(t, x * x, 1) * h;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(kernel::gamma(0.1, 0.0, 1) == doctest::Approx(1.0 / std::sqrt(0.4 * kPi)));
    CHECK(kernel::fourier_gamma(0.3, 2.0) == doctest::Approx(std::exp(-0.6)));
    CHECK(kernel::fourier_gamma(0.0, 5.0) == doctest::Approx(1.0));
    CHECK_THROWS(kernel::gamma(-0.1, 1.0, 1));
}

TEST_CASE("white d=1 closed forms against quadrature") {
    PhiEvaluator phi(SpectralMeasure::white(1));
    CHECK(phi.has_closed_j());
    CHECK(phi.has_closed_phi());
    for (double t : {0.1, 0.5, 1.0}) {
        CHECK(phi.phi(t, Route::ClosedForm) ==
              doctest::Approx(std::sqrt(t / (2.0 * kPi))).epsilon(1e-14));
        CHECK(phi.phi(t, Route::Quadrature) ==
              doctest::Approx(phi.phi(t, Route::ClosedForm)).epsilon(1e-8));
        CHECK(phi.j_rate(t, Route::ClosedForm) ==
              doctest::Approx(1.0 / std::sqrt(8.0 * kPi * t)).epsilon(1e-14));
        CHECK(phi.j_rate(t, Route::Quadrature) ==
              doctest::Approx(phi.j_rate(t, Route::ClosedForm)).epsilon(1e-8));
    }
    CHECK(phi.phi(0.0) == 0.0);
}

TEST_CASE("white d=2 rate") {
    PhiEvaluator phi(SpectralMeasure::white(2));
    // J(t) = (8 pi t)^{-d/2}.
    CHECK(phi.j_rate(0.25) == doctest::Approx(1.0 / (8.0 * kPi * 0.25)).epsilon(1e-8));
}

TEST_CASE("riesz closed forms, scaling exponents") {
    const double eta = 0.5;
    PhiEvaluator phi(SpectralMeasure::riesz(eta, 1));
    const double c = SpectralMeasure::riesz_constant(eta, 1);
    for (double t : {0.1, 0.4}) {
        const double j_exact = c * std::tgamma(eta / 2.0) * std::pow(2.0 * t, -eta / 2.0);
        CHECK(phi.j_rate(t, Route::ClosedForm) == doctest::Approx(j_exact).epsilon(1e-12));
        CHECK(phi.j_rate(t, Route::Quadrature) == doctest::Approx(j_exact).epsilon(1e-7));
        const double phi_exact = j_exact * t / (1.0 - eta / 2.0);
        CHECK(phi.phi(t, Route::ClosedForm) == doctest::Approx(phi_exact).epsilon(1e-12));
        CHECK(phi.phi(t, Route::Quadrature) == doctest::Approx(phi_exact).epsilon(1e-7));
    }
    // Slopes: J ~ t^{-eta/2}, Phi ~ t^{1 - eta/2}.
    const double rj = std::log(phi.j_rate(0.4) / phi.j_rate(0.1)) / std::log(4.0);
    CHECK(rj == doctest::Approx(-eta / 2.0).epsilon(1e-10));
    const double rp = std::log(phi.phi(0.4) / phi.phi(0.1)) / std::log(4.0);
    CHECK(rp == doctest::Approx(1.0 - eta / 2.0).epsilon(1e-10));
}

TEST_CASE("exponential covariance rate is bounded at zero") {
    PhiEvaluator phi(SpectralMeasure::exponential_cov(1.0));
    // J(t) = e^{2t} erfc(sqrt(2t)) for unit scale.
    for (double t : {0.1, 0.5}) {
        const double exact = std::exp(2.0 * t) * std::erfc(std::sqrt(2.0 * t));
        CHECK(phi.j_rate(t) == doctest::Approx(exact).epsilon(1e-7));
    }
    // Near zero the rate tends to Lambda(0) = 1, so Phi(t) ~ t.
    const double small = phi.phi(0.01);
    CHECK(small / 0.01 > 0.9);
    CHECK(small / 0.01 < 1.0);
}

TEST_CASE("phi differentiates back to the rate") {
    for (auto m : {SpectralMeasure::riesz(0.5, 1), SpectralMeasure::exponential_cov(1.0)}) {
        PhiEvaluator phi(m);
        const double t = 0.5, eps = 1e-4;
        const double deriv = (phi.phi(t + eps) - phi.phi(t - eps)) / (2.0 * eps);
        CHECK(deriv == doctest::Approx(phi.j_rate(t)).epsilon(1e-5));
        CHECK(phi.phi(0.3) < phi.phi(0.5));
        CHECK(phi.phi(0.5) < phi.phi(0.7));
    }
}

TEST_CASE("increment lower bound via the terminal rate") {
    PhiEvaluator phi(SpectralMeasure::white(1));
    for (auto [t, tau1, tau2, T] :
         {std::array<double, 4>{0.5, 0.1, 0.3, 0.5}, std::array<double, 4>{0.4, 0.0, 0.4, 0.5},
          std::array<double, 4>{0.5, 0.45, 0.5, 0.5}}) {
        const auto b = phi.phi_increment_lower(t, tau1, tau2, T);
        CHECK(b.holds);
        CHECK(b.rhs >= b.lhs);
        CHECK(b.lhs == doctest::Approx(phi.j_rate(T) * (tau2 - tau1)).epsilon(1e-12));
    }
    CHECK_THROWS(phi.phi_increment_lower(0.5, 0.3, 0.1, 0.5));  // tau order
}

TEST_CASE("negative times are rejected") {
    PhiEvaluator phi(SpectralMeasure::white(1));
    CHECK_THROWS(phi.phi(-0.1));
    CHECK_THROWS(phi.j_rate(-0.1));
}
