#pragma once

#include <array>
#include <optional>

#include "shen/quadrature.hpp"
#include "shen/spectral.hpp"

namespace shen::kernel {

// Heat kernel Gamma(t,x) = (4 pi t)^{-d/2} exp(-|x|^2/(4t)), t > 0.
double gamma(double t, double dist_sq, int dim);
double gamma(double t, const std::array<double, 2>& x, int dim);

// F Gamma(t)(xi) = exp(-t |xi|^2); accepts t >= 0.
double fourier_gamma(double t, double xi_norm_sq);

enum class Route { Auto, ClosedForm, Quadrature };

// J(t)   = integral exp(-2 t |xi|^2) g(xi) dxi
// Phi(t) = integral_0^t J(s) ds
// Closed forms exist for WhiteNoise (J any d, Phi d=1) and Riesz; the
// quadrature route is fully numeric and available for every family.
struct PhiEvaluator {
    spectral::SpectralMeasure measure;
    quad::Options quad_opts{1e-11, 1e-9, 512};

    explicit PhiEvaluator(const spectral::SpectralMeasure& m) : measure(m) {}

    bool has_closed_j() const;
    bool has_closed_phi() const;

    double j_rate(double t, Route route = Route::Auto) const;
    double phi(double t, Route route = Route::Auto) const;

    // Lower bound Phi(t-tau1) - Phi(t-tau2) >= J(T) (tau2 - tau1) for
    // 0 <= tau1 <= tau2 <= t <= T.
    struct IncrementBound {
        double lhs = 0.0;  // J(T) (tau2 - tau1)
        double rhs = 0.0;  // Phi(t - tau1) - Phi(t - tau2)
        bool holds = false;
    };
    IncrementBound phi_increment_lower(double t, double tau1, double tau2, double T) const;
};

}  // namespace shen::kernel
